"""Real-space eigenmodes of open chains, edge states and mode-basis decay rates."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import (
    ConvergenceFailure,
    DimensionMismatch,
    EdgeUndefined,
    ShapeMismatch,
    SignalBelowFloor,
)
from .model import CouplingSet, ModelConfig, assemble, check_chiral, sin_cos_turns

ZERO_TOL = 1e-9


@dataclass(frozen=True)
class ModeSet:
    energies: np.ndarray
    vectors: np.ndarray
    edge_indices: Tuple[int, ...]
    chiral: bool

    @property
    def n(self) -> int:
        return self.energies.size

    @property
    def zero_index(self) -> int:
        """Index of the eigenvalue closest to zero."""
        return int(np.argmin(np.abs(self.energies)))


@dataclass(frozen=True)
class DecayMatrix:
    gamma_mn: np.ndarray
    zero_index: int

    @property
    def edge_decay(self) -> float:
        return float(self.gamma_mn[self.zero_index, self.zero_index])

    @property
    def edge_column(self) -> np.ndarray:
        return self.gamma_mn[:, self.zero_index]

    def bulk_leakage(self) -> np.ndarray:
        """``Gamma_m0`` for every ``m != 0``."""
        return np.delete(self.edge_column, self.zero_index)


class EdgeState(NamedTuple):
    index: Union[int, Tuple[int, int]]
    distribution: np.ndarray


class RadiatingOverlap(NamedTuple):
    o_cos: float
    o_sin: float
    norm_cos: float
    norm_sin: float

    def edge_decay(self, gamma0: float) -> float:
        """Rebuild Gamma_00 from the rank-2 factorization of the kernel."""
        return gamma0 * ((self.norm_cos * self.o_cos) ** 2 + (self.norm_sin * self.o_sin) ** 2)


class NuFit(NamedTuple):
    nu: float
    intercept: float
    residual: float
    sizes: np.ndarray
    ln_abs_gamma: np.ndarray


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    # largest-magnitude entry of each column positive; argmax picks the lowest index on ties
    pivot = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[pivot, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def _edge_indices(energies: np.ndarray) -> Tuple[int, ...]:
    order = np.argsort(np.abs(energies), kind="stable")
    count = 1 if energies.size % 2 else 2
    return tuple(sorted(int(i) for i in order[:count]))


def diagonalize(couplings: Union[CouplingSet, np.ndarray]) -> ModeSet:
    h = couplings.h if isinstance(couplings, CouplingSet) else np.asarray(couplings, dtype=float)
    try:
        energies, vectors = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    return ModeSet(
        energies=energies,
        vectors=_fix_signs(vectors),
        edge_indices=_edge_indices(energies),
        chiral=check_chiral(h),
    )


def mode_labels(n: int, zero_index: Optional[int] = None) -> np.ndarray:
    """Label modes ``m`` by ascending energy with the zero mode at ``m = 0``."""
    if zero_index is None:
        zero_index = (n - 1) // 2
    return np.arange(n) - zero_index


def edge_state(modes: ModeSet, zero_tol: float = ZERO_TOL, scale: float = 1.0) -> EdgeState:
    """Midgap state(s) of a chiral chain and their site probabilities.

    Odd chains return the single zero-energy column.  Even chains return the
    two eigenvalues of smallest magnitude as a ``(2, N)`` probability array,
    provided they sit well inside the remaining spectrum.
    """
    if not modes.chiral:
        raise EdgeUndefined("chiral symmetry is broken; the edge state is not defined")
    energies = np.abs(modes.energies)
    if modes.n % 2:
        idx = modes.zero_index
        if energies[idx] >= zero_tol * scale:
            raise EdgeUndefined(f"no zero-energy state (smallest |E| = {energies[idx]:.3e})")
        return EdgeState(idx, modes.vectors[:, idx] ** 2)
    order = np.argsort(energies, kind="stable")
    pair, rest = order[:2], order[2:]
    if rest.size and energies[pair].max() >= 0.5 * energies[rest].min():
        raise EdgeUndefined("no midgap pair separated from the bulk")
    i, j = sorted(int(k) for k in pair)
    return EdgeState((i, j), modes.vectors[:, [i, j]].T ** 2)


def ipr(psi) -> float:
    """Inverse participation ratio of an (unnormalized) amplitude vector."""
    p = np.abs(np.asarray(psi)) ** 2
    total = p.sum()
    if total == 0:
        raise ValueError("ipr of a zero vector")
    return float(np.sum(p**2) / total**2)


def decay_matrix(modes: ModeSet, gamma: np.ndarray) -> DecayMatrix:
    gamma = np.asarray(gamma, dtype=float)
    if gamma.shape != (modes.n, modes.n):
        raise DimensionMismatch(f"gamma is {gamma.shape}, modes have N = {modes.n}")
    v = modes.vectors
    gmn = v.T @ gamma @ v
    gmn = 0.5 * (gmn + gmn.T)
    return DecayMatrix(gamma_mn=gmn, zero_index=modes.zero_index)


def radiating_overlap(modes: ModeSet, config: ModelConfig) -> RadiatingOverlap:
    """Overlap of the zero mode with the two radiating (cos/sin) profiles."""
    if modes.n != config.n_emitters:
        raise DimensionMismatch("mode set and config disagree on N")
    sin, cos = sin_cos_turns(config.positions)
    psi = modes.vectors[:, modes.zero_index]
    nc, ns = float(np.linalg.norm(cos)), float(np.linalg.norm(sin))
    oc = float(cos @ psi) / nc if nc else 0.0
    os_ = float(sin @ psi) / ns if ns else 0.0
    return RadiatingOverlap(oc, os_, nc, ns)


def analytic_edge_state(config: ModelConfig) -> np.ndarray:
    """Closed-form dark zero mode at d = 3/4 and J0/gamma0 = 1/2.

    Sites 4n+1 and 4n+3 (1-based) carry ``(-1)^n tan(phi/2)^(2n)``; all other
    sites are empty.  Only chains with N = 4M + 3 close the last pair.
    """
    n = config.n_emitters
    if n % 4 != 3:
        raise ShapeMismatch(f"analytic edge state needs N = 4M + 3, got N = {n}")
    psi = np.zeros(n)
    t2 = np.tan(config.phi / 2.0) ** 2
    for cell in range((n - 3) // 4 + 1):
        amp = (-1) ** cell * t2**cell
        psi[4 * cell] = amp
        psi[4 * cell + 2] = amp
    return psi / np.linalg.norm(psi)


def edge_bulk_coupling(config: ModelConfig, branch: int = 1) -> float:
    """``|Gamma_m'0|`` for the bulk mode ``m' = branch * (N - 3) / 2``."""
    couplings = assemble(config)
    modes = diagonalize(couplings)
    dm = decay_matrix(modes, couplings.gamma)
    m = modes.zero_index + branch * (modes.n - 3) // 2
    return abs(float(dm.gamma_mn[m, modes.zero_index]))


def nu_scaling_fit(
    config: ModelConfig,
    sizes: Sequence[int],
    branch: int = 1,
    floor: float = 1e-14,
) -> NuFit:
    """Fit ``-ln(|Gamma_m'0| / gamma0) = nu * N + c`` over odd chain sizes."""
    sizes = np.asarray(sizes, dtype=int)
    if sizes.size < 4 or np.any(sizes % 2 == 0):
        raise ShapeMismatch("nu fit needs at least four odd chain sizes")
    if branch not in (1, -1):
        raise ValueError("branch must be +1 or -1")
    values = np.array([edge_bulk_coupling(config.with_(n_emitters=int(n)), branch) for n in sizes])
    scale = config.rate_scale
    if np.any(values < floor * scale):
        raise SignalBelowFloor(
            f"|Gamma_m'0| below {floor:g} gamma0 for N = {sizes[values < floor * scale].tolist()}"
        )
    y = np.log(values / scale)
    coeffs, res, *_ = np.polyfit(sizes.astype(float), -y, 1, full=True)
    residual = float(np.sqrt(res[0] / sizes.size)) if res.size else 0.0
    return NuFit(
        nu=float(coeffs[0]),
        intercept=float(coeffs[1]),
        residual=residual,
        sizes=sizes,
        ln_abs_gamma=y,
    )
