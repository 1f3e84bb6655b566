"""Single-excitation open dynamics.

The no-jump generator ``H_eff = h - (i/2) gamma`` is exact for the
single-excitation block because the dissipator only lowers the excitation
number.  :func:`lindblad_oracle` integrates the full 2^N master equation as an
independent check of that reduction.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np
import scipy.linalg
import scipy.sparse
from threadpoolctl import threadpool_limits

from .errors import ConfigError, DefectiveMatrix, StepTooLarge
from .model import CouplingSet, ModelConfig, assemble
from .modes import diagonalize
from .results import SweepResult

WINDOW_THRESHOLD = 1e-6
CONDITION_LIMIT = 1e8
DEFECTIVE_LIMIT = 1e13


@dataclass(frozen=True)
class ComplexModeSet:
    eigenvalues: np.ndarray
    right_vectors: np.ndarray
    left_vectors: np.ndarray
    condition: float
    edge_index: Optional[int] = None

    @property
    def energies(self) -> np.ndarray:
        return self.eigenvalues.real

    @property
    def decay_rates(self) -> np.ndarray:
        """Effective decay rates, ``-Im(lambda)``."""
        return -self.eigenvalues.imag

    @property
    def edge_decay(self) -> float:
        if self.edge_index is None:
            raise ValueError("no edge mode was identified")
        return float(self.decay_rates[self.edge_index])


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    site_populations: np.ndarray
    ground_population: np.ndarray
    norm: np.ndarray


def effective_hamiltonian(couplings: CouplingSet) -> np.ndarray:
    return couplings.h - 0.5j * couplings.gamma


def _match(vectors: np.ndarray, reference: np.ndarray) -> int:
    weights = np.abs(reference.conj() @ vectors) / np.linalg.norm(vectors, axis=0)
    return int(np.argmax(weights))


def complex_diagonalize(h_eff: np.ndarray, reference: Optional[np.ndarray] = None) -> ComplexModeSet:
    """Biorthonormal eigen-decomposition of a non-Hermitian matrix.

    Right vectors are unit-normalized; the left vectors are the rows of the
    inverse right-vector matrix, so ``L^H R = 1`` holds by construction.  If
    ``reference`` is given, the mode with the largest normalized overlap with
    it is recorded as the edge mode.
    """
    h_eff = np.asarray(h_eff, dtype=complex)
    eigenvalues, right = scipy.linalg.eig(h_eff)
    right = right / np.linalg.norm(right, axis=0)
    condition = float(np.linalg.cond(right))
    if not np.isfinite(condition) or condition > DEFECTIVE_LIMIT:
        raise DefectiveMatrix(f"eigenvector matrix condition {condition:.3e}; exceptional point")
    left = np.linalg.inv(right).conj().T
    if condition > CONDITION_LIMIT:
        warnings.warn(f"near-defective spectrum (condition {condition:.3e})", RuntimeWarning)
    edge = _match(right, np.asarray(reference)) if reference is not None else None
    return ComplexModeSet(eigenvalues, right, left, condition, edge)


def _trajectory(times: np.ndarray, amplitudes: np.ndarray) -> Trajectory:
    pops = np.abs(amplitudes) ** 2
    norm = pops.sum(axis=1)
    return Trajectory(times=times, site_populations=pops, ground_population=1.0 - norm, norm=norm)


def _check_times(times) -> np.ndarray:
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0 or times[0] < 0 or np.any(np.diff(times) < 0):
        raise ConfigError("times must be a non-empty ascending grid starting at t >= 0")
    return times


def propagate(h_eff: np.ndarray, initial, times, modes: Optional[ComplexModeSet] = None) -> Trajectory:
    """Evolve site amplitudes with ``exp(-i H_eff t)``."""
    h_eff = np.asarray(h_eff, dtype=complex)
    times = _check_times(times)
    a0 = np.asarray(initial, dtype=complex)
    if a0.shape != (h_eff.shape[0],):
        raise ConfigError("initial amplitude vector has the wrong length")
    if not np.isclose(np.vdot(a0, a0).real, 1.0, atol=1e-12):
        raise ConfigError("initial amplitudes must be normalized")
    if modes is None:
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                modes = complex_diagonalize(h_eff)
        except DefectiveMatrix:
            modes = None
    if modes is not None and modes.condition <= CONDITION_LIMIT:
        coeffs = modes.left_vectors.conj().T @ a0
        phases = np.exp(-1j * np.outer(times, modes.eigenvalues))
        amps = (phases * coeffs) @ modes.right_vectors.T
    else:
        amps = np.array([scipy.linalg.expm(-1j * h_eff * t) @ a0 for t in times])
    return _trajectory(times, amps)


def _lowering_operators(n: int) -> np.ndarray:
    """sigma_i^- on the 2^n space; bit i of the basis index is emitter i."""
    dim = 2**n
    states = np.arange(dim)
    ops = np.zeros((n, dim, dim))
    for i in range(n):
        excited = states[(states >> i) & 1 == 1]
        ops[i, excited ^ (1 << i), excited] = 1.0
    return ops


def lindblad_oracle(
    system: Union[ModelConfig, CouplingSet],
    initial,
    times,
    dt: float = 1e-3,
    max_halvings: int = 6,
) -> Trajectory:
    """Integrate the full master equation with fixed-step RK4.

    ``initial`` holds single-excitation site amplitudes.  ``dt`` is in units of
    1/gamma0 and is halved until the trace drifts by less than 1e-7.
    """
    if isinstance(system, ModelConfig):
        couplings = assemble(system)
        rate = system.rate_scale
    else:
        couplings = system
        rate = max(float(np.max(np.abs(couplings.gamma))), 1.0)
    n = couplings.n
    if n > 8:
        raise ConfigError(f"full Lindblad oracle is limited to N <= 8, got {n}")
    times = _check_times(times)
    a0 = np.asarray(initial, dtype=complex)
    if a0.shape != (n,):
        raise ConfigError("initial amplitude vector has the wrong length")

    dim = 2**n
    lower = _lowering_operators(n)
    raise_ = lower.transpose(0, 2, 1)
    hamiltonian = np.einsum("ij,iab,jbc->ac", couplings.h, raise_, lower)
    loss = np.einsum("ij,iab,jbc->ac", couplings.gamma, raise_, lower)
    drift = hamiltonian - 0.5j * loss
    # jump term sum_ij gamma_ij s_i^- rho s_j^+ = sum_i (s_i^- rho) B_i^dagger with
    # B_i = sum_j gamma_ij s_j^-; s_i^- rho is a row gather (row `dim` is zero)
    states = np.arange(dim)
    gather = np.where((states[None, :] >> np.arange(n)[:, None]) & 1 == 0,
                      states[None, :] | (1 << np.arange(n))[:, None], dim)
    # rows (i, b), columns a: B_i[a, b]
    partner_t = np.einsum("ij,jab->iba", couplings.gamma, lower).reshape(n * dim, dim)
    partner_t = scipy.sparse.csr_matrix(partner_t.T)
    drift_sp = scipy.sparse.csr_matrix(drift)
    padded = np.zeros((dim + 1, dim), dtype=complex)

    def rhs(rho):
        padded[:dim] = rho
        lowered = padded[gather].transpose(1, 0, 2).reshape(dim, n * dim)
        jumps = (partner_t @ lowered.T).T
        coherent = drift_sp @ rho
        return -1j * (coherent - coherent.conj().T) + jumps

    psi = np.zeros(dim, dtype=complex)
    psi[1 << np.arange(n)] = a0
    rho0 = np.outer(psi, psi.conj())
    single = 1 << np.arange(n)

    step = dt / rate
    # tiny matrices: BLAS threading costs more than it saves
    with threadpool_limits(limits=1):
        for _ in range(max_halvings + 1):
            pops, drift_max = _rk4_populations(rhs, rho0, times, step, single)
            if drift_max < 1e-7:
                norm = pops.sum(axis=1)
                return Trajectory(times, pops, 1.0 - norm, norm)
            step /= 2.0
    raise StepTooLarge(f"trace drift {drift_max:.3e} persists after {max_halvings} halvings")


def _rk4_populations(rhs, rho0, times, step, single):
    rho = rho0.copy()
    t = 0.0
    pops = np.empty((times.size, single.size))
    drift_max = 0.0
    for k, target in enumerate(times):
        span = target - t
        if span > 0:
            m = int(np.ceil(span / step - 1e-9))
            h = span / m
            for _ in range(m):
                k1 = rhs(rho)
                k2 = rhs(rho + 0.5 * h * k1)
                k3 = rhs(rho + 0.5 * h * k2)
                k4 = rhs(rho + h * k3)
                rho = rho + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            t = target
        drift_max = max(drift_max, abs(np.trace(rho).real - 1.0))
        pops[k] = rho[single, single].real
    return pops, drift_max


def _hermitian_edge(h: np.ndarray, reference: Optional[np.ndarray]) -> np.ndarray:
    modes = diagonalize(h)
    # a chiral odd chain pins the edge mode to its exact zero mode
    if reference is None or (modes.chiral and modes.n % 2):
        return modes.vectors[:, modes.zero_index]
    idx = _match(modes.vectors, reference)
    v = modes.vectors[:, idx]
    return v if v @ reference >= 0 else -v


def window_scan(
    config: ModelConfig,
    d_grid: Sequence[float],
    threshold: float = WINDOW_THRESHOLD,
    center: float = 0.75,
) -> SweepResult:
    """Edge-mode decay versus emitter spacing.

    The Hermitian edge mode is the zero mode wherever the chain is chiral (odd
    N); elsewhere it is followed outward from the grid point closest to
    ``center`` by maximal overlap with its neighbour.
    The non-Hermitian edge mode at each spacing is the right eigenvector of
    ``H_eff`` with the largest overlap with the tracked Hermitian mode.
    """
    d_grid = np.asarray(d_grid, dtype=float)
    if d_grid.ndim != 1 or d_grid.size == 0 or np.any(np.diff(d_grid) <= 0):
        raise ConfigError("d_grid must be strictly increasing")
    if d_grid[0] <= 0 or d_grid[-1] > 1:
        raise ConfigError("d_grid must lie in (0, 1]")

    start = int(np.argmin(np.abs(d_grid - center)))
    gamma00 = np.empty(d_grid.size)
    gamma_tilde = np.empty(d_grid.size)
    energy = np.empty(d_grid.size)

    def visit(i, reference):
        couplings = assemble(config.with_(spacing=float(d_grid[i])))
        psi = _hermitian_edge(couplings.h, reference)
        gamma00[i] = psi @ couplings.gamma @ psi
        cm = complex_diagonalize(effective_hamiltonian(couplings), reference=psi)
        gamma_tilde[i] = cm.edge_decay
        energy[i] = cm.energies[cm.edge_index]
        return psi

    anchor = visit(start, None)
    ref = anchor
    for i in range(start + 1, d_grid.size):
        ref = visit(i, ref)
    ref = anchor
    for i in range(start - 1, -1, -1):
        ref = visit(i, ref)

    below = gamma_tilde < threshold * config.rate_scale
    lo = hi = start
    if below[start]:
        while lo > 0 and below[lo - 1]:
            lo -= 1
        while hi < d_grid.size - 1 and below[hi + 1]:
            hi += 1
        width = float(d_grid[hi] - d_grid[lo])
        window_center = float(0.5 * (d_grid[hi] + d_grid[lo]))
    else:
        width, window_center = 0.0, float("nan")

    rows = [tuple(float(v) for v in row) for row in zip(d_grid, gamma00, gamma_tilde)]
    return SweepResult(
        columns=("d_over_lambda0", "Gamma00", "Gamma_tilde0"),
        rows=rows,
        meta={
            "window_center": window_center,
            "window_width": width,
            "threshold": threshold,
            "edge_energy": energy.tolist(),
        },
    )
