"""Two-band momentum-space picture of the dimerized array.

The Bloch components use the finite-N ring-regularized sums, evaluated on a
continuous quasi-momentum axis.  They are defined only for an even number of
emitters and for the two chiral spacings d = 1/4 and d = 3/4; other spacings
break the translational regularization.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .errors import ConfigError, DegenerateFit, GapClosed, NonIntegerWinding
from .model import ModelConfig

GAP_TOL = 1e-8
_SPACING_TOL = 1e-12


class BlochSample(NamedTuple):
    k: np.ndarray
    hx: np.ndarray
    hy: np.ndarray
    energy_plus: np.ndarray
    energy_minus: np.ndarray


class BandSummary(NamedTuple):
    gap: float
    width: float
    critical_gamma: float
    winding: int


class DispersionFit(NamedTuple):
    exponent: float
    gapped: bool
    residual: float


def photon_coupling(config: ModelConfig) -> float:
    """Return g0: +gamma0/2 at d = 1/4, -gamma0/2 at d = 3/4."""
    if not config.is_clean:
        raise ConfigError("Bloch components need a clean (offset-free) chain")
    if abs(config.spacing - 0.25) < _SPACING_TOL:
        return 0.5 * config.gamma0
    if abs(config.spacing - 0.75) < _SPACING_TOL:
        return -0.5 * config.gamma0
    raise ConfigError(
        f"Bloch components are only defined for spacing 1/4 or 3/4, got {config.spacing}"
    )


def _cell_couplings(config: ModelConfig):
    if config.n_emitters % 2:
        raise ConfigError(f"Bloch picture needs an even n_emitters, got {config.n_emitters}")
    # closed form, so that N = 2 (a single bond) still has an intercell J2
    c = np.cos(config.phi)
    return config.j0 * (1.0 - c), config.j0 * (1.0 + c)


def ring_form_factor(k, n: int) -> np.ndarray:
    """Long-range sine sum sum_{j=1}^{n/2} 2(-1)^(j-1) sin(jk) - sin(nk/2)."""
    k = np.asarray(k, dtype=float)
    total = np.zeros_like(k)
    for j in range(1, n // 2 + 1):
        total += 2.0 * (-1) ** (j - 1) * np.sin(j * k)
    return total - np.sin(n * k / 2.0)


def bloch_components(config: ModelConfig, k):
    j1, j2 = _cell_couplings(config)
    g0 = photon_coupling(config)
    n = config.n_emitters
    k = np.asarray(k, dtype=float)
    hx = j1 + j2 * np.cos(k) + 0.5 * g0 * (1.0 + np.cos(n * k / 2.0))
    hy = j2 * np.sin(k) + 0.5 * g0 * ring_form_factor(k, n)
    return hx, hy


def bloch_sample(config: ModelConfig, k) -> BlochSample:
    k = np.asarray(k, dtype=float)
    hx, hy = bloch_components(config, k)
    e = np.hypot(hx, hy)
    return BlochSample(k=k, hx=hx, hy=hy, energy_plus=e, energy_minus=-e)


def brillouin_grid(samples: int) -> np.ndarray:
    return -np.pi + 2.0 * np.pi * np.arange(samples) / samples


def winding_number(config: ModelConfig, samples: int = 4096, gap_tol: float = GAP_TOL) -> int:
    """Count the turns of (hx, hy) around the origin across the zone.

    Raises GapClosed when the curve comes within ``gap_tol * rate`` of the
    origin and NonIntegerWinding when the accumulated phase is not close to a
    multiple of 2 pi (too few samples).
    """
    if samples < 1000:
        raise ConfigError(f"winding needs at least 1000 k samples, got {samples}")
    k = brillouin_grid(samples)
    hx, hy = bloch_components(config, k)
    radius = np.hypot(hx, hy)
    if radius.min() <= gap_tol * config.rate_scale:
        raise GapClosed(
            f"|h(k)| = {radius.min():.3e} at k = {k[radius.argmin()]:.6f}; winding undefined"
        )
    theta = np.arctan2(-hx, hy)
    step = np.diff(np.append(theta, theta[0]))
    # wrap into (-pi, pi]
    step = np.pi - np.mod(np.pi - step, 2.0 * np.pi)
    turns = math.fsum(step) / (2.0 * np.pi)
    w = int(round(turns))
    if abs(turns - w) >= 0.01:
        raise NonIntegerWinding(f"accumulated {turns:.4f} turns; increase samples")
    return w


def band_summary(config: ModelConfig, samples: int = 4096) -> BandSummary:
    j1, j2 = _cell_couplings(config)
    photon_coupling(config)
    width = 2.0 * (j1 + j2)
    return BandSummary(
        gap=2.0 * abs(j1 - j2),
        width=width,
        critical_gamma=width,
        winding=winding_number(config, samples),
    )


def dispersion_exponent(
    config: ModelConfig,
    k_window: float = 0.1,
    k_center: float = 0.0,
    points: int = 41,
    gap_tol: float = GAP_TOL,
) -> DispersionFit:
    """Fit ``ln e+(k)`` against ``ln|k - k_center|`` on ``0 < |k - k_center| <= k_window``.

    A configuration with ``e+(k_center)`` above ``gap_tol`` is flagged as
    gapped; its slope is still returned (it tends to zero).
    """
    dk = np.geomspace(k_window * 1e-2, k_window, points)
    e_center = float(bloch_sample(config, k_center).energy_plus)
    e = bloch_sample(config, k_center + dk).energy_plus
    if np.any(e <= np.finfo(float).tiny):
        raise DegenerateFit("band energy underflows inside the fit window")
    x, y = np.log(dk), np.log(e)
    coeffs, res, *_ = np.polyfit(x, y, 1, full=True)
    residual = float(np.sqrt(res[0] / points)) if res.size else 0.0
    return DispersionFit(
        exponent=float(coeffs[0]),
        gapped=e_center > gap_tol * config.rate_scale,
        residual=residual,
    )
