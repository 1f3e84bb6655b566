"""Phase classification, parameter grids and position-disorder ensembles."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .bloch import winding_number
from .dynamics import complex_diagonalize, effective_hamiltonian
from .errors import ConfigError, GapClosed
from .model import ModelConfig, assemble
from .modes import diagonalize, ipr
from .results import SweepResult

AXES = ("j0_over_gamma0", "phi", "spacing", "gamma0_over_width", "j1_over_j2")
LABELS = ("TP-I", "TP-II", "NTP")
CRITICAL = "critical"
RNG_NAME = "philox4x64-10"


@dataclass(frozen=True)
class Axis:
    name: str
    values: np.ndarray

    def __post_init__(self):
        if self.name not in AXES:
            raise ConfigError(f"unknown sweep axis {self.name!r}; expected one of {', '.join(AXES)}")
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1 or values.size == 0:
            raise ConfigError(f"axis {self.name} needs a non-empty 1D grid")
        if values.size > 1 and not (np.all(np.diff(values) > 0) or np.all(np.diff(values) < 0)):
            raise ConfigError(f"axis {self.name} grid must be strictly monotone")
        object.__setattr__(self, "values", values)

    @classmethod
    def linspace(cls, name: str, start: float, stop: float, count: int) -> "Axis":
        return cls(name, np.linspace(start, stop, int(count)))


@dataclass(frozen=True)
class SweepSpec:
    base: ModelConfig
    axis1: Axis
    axis2: Optional[Axis] = None
    seed: int = 0
    samples: int = 1

    def __post_init__(self):
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if self.samples < 1:
            raise ConfigError("samples must be >= 1")
        if self.axis2 is not None and self.axis1.name == self.axis2.name:
            raise ConfigError("the two sweep axes must differ")
        names = {self.axis1.name, self.axis2.name if self.axis2 else None}
        if {"j0_over_gamma0", "gamma0_over_width"} <= names:
            raise ConfigError("j0_over_gamma0 and gamma0_over_width cannot be swept together")
        if {"phi", "j1_over_j2"} <= names:
            raise ConfigError("phi and j1_over_j2 cannot be swept together")


@dataclass(frozen=True)
class PhasePoint:
    winding: Optional[int]
    edge_present: bool
    label: str
    gamma_tilde0: float
    edge_ipr: float
    j1_over_j2: float
    gamma0_over_width: float

    winding_available: bool = True

    @property
    def on_critical_line(self) -> bool:
        return self.winding_available and self.winding is None

    @property
    def distance_ssh(self) -> float:
        return self.j1_over_j2 - 1.0

    @property
    def distance_dtpt(self) -> float:
        return self.gamma0_over_width - 1.0


def apply_axis(config: ModelConfig, name: str, value: float) -> ModelConfig:
    value = float(value)
    if name == "j0_over_gamma0":
        if config.gamma0 <= 0:
            raise ConfigError("j0_over_gamma0 needs gamma0 > 0")
        return config.with_(j0=value * config.gamma0)
    if name == "gamma0_over_width":
        if config.j0 <= 0:
            raise ConfigError("gamma0_over_width needs j0 > 0")
        return config.with_(gamma0=value * 4.0 * config.j0)
    if name == "j1_over_j2":
        if value < 0:
            raise ConfigError("j1_over_j2 must be >= 0")
        return config.with_(phi=float(np.arccos((1.0 - value) / (1.0 + value))))
    return config.with_(**{name: value})


def _edge_present(config: ModelConfig, modes) -> Tuple[bool, float, Optional[np.ndarray]]:
    """Localized midgap state(s): the one (odd N) or two (even N) modes closest
    to zero energy, each with IPR above 2/N."""
    values = [ipr(modes.vectors[:, k]) for k in modes.edge_indices]
    psi = modes.vectors[:, modes.edge_indices[0]]
    return min(values) > 2.0 / modes.n, min(values), psi


def classify_phase(config: ModelConfig, bloch_emitters: int = 6, samples: int = 4096) -> PhasePoint:
    """Label one parameter point.

    The winding comes from the two-band formulas with ``bloch_emitters`` sites
    on the regularizing ring; the edge data come from the open chain of
    ``config.n_emitters`` sites.  Labels: TP-I = winding 1 with a localized
    midgap state, TP-II = winding 1 without one, NTP = winding 0.  A closed
    gap gives winding ``None`` and the label ``critical``.  Spacings without a
    Bloch picture fall back to TP-I / NTP from the edge data alone.
    """
    j1, j2 = config.j0 * (1.0 - np.cos(config.phi)), config.j0 * (1.0 + np.cos(config.phi))
    width = 2.0 * (j1 + j2)
    ratio = j1 / j2 if j2 > 0 else float("inf")
    g_over_w = config.gamma0 / width if width > 0 else float("inf")

    winding: Optional[int] = None
    bloch_ok = config.is_clean and any(abs(config.spacing - d) < 1e-12 for d in (0.25, 0.75))
    if bloch_ok:
        try:
            winding = winding_number(config.with_(n_emitters=bloch_emitters), samples)
        except GapClosed:
            winding = None

    couplings = assemble(config)
    modes = diagonalize(couplings)
    present, edge_ipr, psi = _edge_present(config, modes)
    gamma_tilde0 = float("nan")
    if psi is not None:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            cm = complex_diagonalize(effective_hamiltonian(couplings), reference=psi)
        gamma_tilde0 = cm.edge_decay

    if not bloch_ok:
        # no Bloch picture: real-space data only
        label = "TP-I" if present else "NTP"
    elif winding is None:
        label = CRITICAL
    elif winding == 1:
        label = "TP-I" if present else "TP-II"
    else:
        label = "NTP"
    return PhasePoint(winding, present, label, gamma_tilde0, edge_ipr, ratio, g_over_w, bloch_ok)


PHASE_COLUMNS = (
    "axis1",
    "axis2",
    "winding",
    "edge_present",
    "label",
    "gamma_tilde0",
    "j1_over_j2",
    "gamma0_over_width",
    "boundary",
)


def phase_diagram(spec: SweepSpec, bloch_emitters: int = 6) -> SweepResult:
    axis2 = spec.axis2 if spec.axis2 is not None else Axis("phi", [spec.base.phi])
    grid: List[List[PhasePoint]] = []
    for v1 in spec.axis1.values:
        row = []
        for v2 in axis2.values:
            cfg = apply_axis(apply_axis(spec.base, spec.axis1.name, v1), axis2.name, v2)
            row.append(classify_phase(cfg, bloch_emitters))
        grid.append(row)

    labels = np.array([[p.label for p in row] for row in grid], dtype=object)
    boundary = np.zeros(labels.shape, dtype=bool)
    boundary[1:, :] |= labels[1:, :] != labels[:-1, :]
    boundary[:-1, :] |= labels[:-1, :] != labels[1:, :]
    boundary[:, 1:] |= labels[:, 1:] != labels[:, :-1]
    boundary[:, :-1] |= labels[:, :-1] != labels[:, 1:]

    rows = []
    for a, v1 in enumerate(spec.axis1.values):
        for b, v2 in enumerate(axis2.values):
            p = grid[a][b]
            rows.append((
                float(v1), float(v2),
                "undefined" if p.winding is None else p.winding,
                p.edge_present, p.label, p.gamma_tilde0,
                p.j1_over_j2, p.gamma0_over_width, bool(boundary[a, b]),
            ))
    return SweepResult(
        columns=PHASE_COLUMNS,
        rows=rows,
        meta={
            "axis1": spec.axis1.name,
            "axis2": axis2.name,
            "shape": list(labels.shape),
            "label_convention": "TP-I: W=1 with localized midgap state; "
                                "TP-II: W=1 without; NTP: W=0; critical: gap closed",
            "bloch_emitters": bloch_emitters,
        },
    )


def sample_generator(seed: int, sample: int) -> np.random.Generator:
    """Counter-based stream for one ensemble member, keyed by (seed, sample)."""
    key = np.array([seed, sample], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


@dataclass(frozen=True)
class DisorderStats:
    values: np.ndarray
    resamples: np.ndarray
    clean_value: float
    seed: int
    width: float

    @property
    def mean(self) -> float:
        return float(np.mean(self.values))

    @property
    def median(self) -> float:
        return float(np.median(self.values))

    @property
    def p05(self) -> float:
        return float(np.percentile(self.values, 5))

    @property
    def p95(self) -> float:
        return float(np.percentile(self.values, 95))

    @property
    def total_resamples(self) -> int:
        return int(self.resamples.sum())

    def bootstrap_median_se(self, draws: int = 500) -> float:
        rng = sample_generator(self.seed, 2**63)
        idx = rng.integers(0, self.values.size, size=(draws, self.values.size))
        return float(np.std(np.median(self.values[idx], axis=1), ddof=1))


def _draw_offsets(rng: np.random.Generator, config: ModelConfig, width: float, max_tries: int = 1000):
    for tries in range(max_tries):
        offsets = rng.uniform(-width, width, size=config.n_emitters)
        if np.all(np.diff(np.arange(config.n_emitters) * config.spacing + offsets) > 0):
            return offsets, tries
    raise ConfigError(f"could not draw ordered positions with disorder width {width}")


def edge_decay_with_offsets(config: ModelConfig, reference: np.ndarray) -> float:
    couplings = assemble(config)
    modes = diagonalize(couplings)
    overlaps = np.abs(reference @ modes.vectors)
    psi = modes.vectors[:, int(np.argmax(overlaps))]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        cm = complex_diagonalize(effective_hamiltonian(couplings), reference=psi)
    return cm.edge_decay


def disorder_ensemble(config: ModelConfig, width: float, samples: int, seed: int) -> DisorderStats:
    """Edge-mode decay under independent uniform position offsets in [-w, w]."""
    if width < 0:
        raise ConfigError("disorder width must be >= 0")
    if samples < 1:
        raise ConfigError("samples must be >= 1")
    clean = config.with_(offsets=None)
    clean_modes = diagonalize(assemble(clean))
    reference = clean_modes.vectors[:, clean_modes.zero_index]
    clean_value = edge_decay_with_offsets(clean, reference)
    values = np.empty(samples)
    resamples = np.zeros(samples, dtype=int)
    for s in range(samples):
        if width == 0:
            values[s] = clean_value
            continue
        offsets, tries = _draw_offsets(sample_generator(seed, s), clean, width)
        resamples[s] = tries
        values[s] = edge_decay_with_offsets(clean.with_(offsets=tuple(offsets)), reference)
    return DisorderStats(values, resamples, clean_value, seed, width)
