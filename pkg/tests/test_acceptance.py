"""Acceptance gate: ten criteria at their stated tolerances.

Each criterion returns (passed, detail).  Under pytest every criterion is a
test and a one-line verdict per criterion is printed in the terminal summary;
``python3 tests/test_acceptance.py`` prints the same lines directly.
"""

import json
import tempfile
import time
import warnings
from pathlib import Path

import numpy as np
import pytest

from dtpt.bloch import bloch_sample, dispersion_exponent, winding_number
from dtpt.cli import main as cli_main
from dtpt.dynamics import (
    complex_diagonalize,
    effective_hamiltonian,
    lindblad_oracle,
    propagate,
    window_scan,
)
from dtpt.model import ModelConfig, assemble, check_parity
from dtpt.modes import analytic_edge_state, decay_matrix, diagonalize, ipr, nu_scaling_fit

PI = np.pi
VERDICTS = {}


def _timed(limit):
    def wrap(fn):
        def run():
            t0 = time.perf_counter()
            ok, detail = fn()
            elapsed = time.perf_counter() - t0
            in_time = elapsed < limit
            return ok and in_time, f"{detail}; {elapsed:.2f} s (limit {limit:g} s)"

        run.__name__ = fn.__name__
        run.__doc__ = fn.__doc__
        return run

    return wrap


@_timed(1.0)
def c01_winding_transition():
    """Winding 0 below J0/gamma0 = 1/4 and 1 above (N=6, phi=0.1pi, d=3/4)."""
    base = ModelConfig(6, 0.0, 0.1 * PI, gamma0=1.0, spacing=0.75)
    expected = {0.10: 0, 0.20: 0, 0.24: 0, 0.26: 1, 0.30: 1, 1.0: 1}
    got = {r: winding_number(base.with_(j0=r)) for r in expected}
    return got == expected, f"W = {got}"


@_timed(1.0)
def c02_gap_closing():
    """e+(0) < 1e-12 gamma0 and dispersion exponent 2.0 +- 0.1 at gamma0 = 4 J0."""
    cfg = ModelConfig(6, 0.25, 0.1 * PI, gamma0=1.0, spacing=0.75)
    e0 = float(bloch_sample(cfg, 0.0).energy_plus)
    fit = dispersion_exponent(cfg)
    ok = e0 < 1e-12 * cfg.gamma0 and abs(fit.exponent - 2.0) <= 0.1
    return ok, f"e+(0) = {e0:.3e}, exponent = {fit.exponent:.4f}"


@_timed(10.0)
def c03_ipr_minimum():
    """Edge IPR minimum at J0/gamma0 = 0.25 +- 0.01 for phi in {0.1, 0.2, 0.3} pi."""
    grid = np.round(np.arange(0.05, 1.0 + 1e-9, 0.005), 10)
    minima = {}
    for frac in (0.1, 0.2, 0.3):
        base = ModelConfig(21, 0.0, frac * PI, gamma0=1.0, spacing=0.75)
        values = []
        for r in grid:
            modes = diagonalize(assemble(base.with_(j0=float(r))))
            values.append(ipr(modes.vectors[:, modes.zero_index]))
        minima[frac] = float(grid[int(np.argmin(values))])
    ok = all(abs(m - 0.25) <= 0.01 for m in minima.values())
    return ok, "argmin " + ", ".join(f"phi={f}pi: {m:.3f}" for f, m in minima.items())


def _gamma00(cfg):
    c = assemble(cfg)
    modes = diagonalize(c)
    return decay_matrix(modes, c.gamma).edge_decay


@_timed(10.0)
def c04_edge_decay_plateau():
    """Gamma_00 strictly decreasing on (0, 0.25), flat to 1e-6 on (0.25, 0.5] (N=21)."""
    base = ModelConfig(21, 0.0, 0.3 * PI, gamma0=1.0, spacing=0.75)
    grid = np.round(np.arange(1, 101) * 0.005, 10)
    g = np.array([_gamma00(base.with_(j0=float(r))) for r in grid])
    below, above = grid < 0.25, grid > 0.25
    decreasing = bool(np.all(np.diff(g[below]) < 0))
    steps = np.abs(np.diff(g[above]))
    flat = bool(np.all(steps < 1e-6 * base.gamma0))
    worst = float(grid[above][1:][int(np.argmax(steps))])
    return decreasing and flat, (
        f"decreasing below 1/4: {decreasing}; max |dGamma00| above 1/4 = {steps.max():.3e} "
        f"(at J0/gamma0 = {worst:.3f}); step 0.005"
    )


def _max_leak(ratio):
    c = assemble(ModelConfig(21, ratio, 0.3 * PI, gamma0=1.0, spacing=0.75))
    modes = diagonalize(c)
    return float(np.max(np.abs(decay_matrix(modes, c.gamma).bulk_leakage())))


@_timed(5.0)
def c05_bulk_decoupling():
    """max |Gamma_m0| < 1e-10 at J0/gamma0 = 0.3; some |Gamma_m0| > 1e-3 at 0.2 (N=21)."""
    high, low = _max_leak(0.3), _max_leak(0.2)
    return high < 1e-10 and low > 1e-3, f"max|Gamma_m0|: {high:.3e} at 0.3, {low:.3e} at 0.2"


@_timed(30.0)
def c06_finite_size_scaling():
    """nu = 0, 0.005, 0.0115 (+-0.003) for J0/gamma0 = 0.25, 0.251, 0.252, N in 17..49."""
    sizes = list(range(17, 50, 4))
    targets = {0.25: 0.0, 0.251: 0.005, 0.252: 0.0115}
    got = {}
    for r in targets:
        got[r] = nu_scaling_fit(ModelConfig(21, r, 0.3 * PI, gamma0=1.0, spacing=0.75), sizes).nu
    ok = all(abs(got[r] - targets[r]) <= 0.003 for r in targets)
    return ok, "nu " + ", ".join(f"{r}: {got[r]:.5f} (target {targets[r]})" for r in targets)


@_timed(1.0)
def c07_analytic_state():
    """Analytic state overlaps the zero mode to 1 - 1e-10 and Gamma_00 < 1e-12 (N=11)."""
    cfg = ModelConfig(11, 0.5, 0.3 * PI, gamma0=1.0, spacing=0.75)
    c = assemble(cfg)
    modes = diagonalize(c)
    overlap = abs(float(analytic_edge_state(cfg) @ modes.vectors[:, modes.zero_index]))
    g00 = decay_matrix(modes, c.gamma).edge_decay
    return overlap >= 1 - 1e-10 and g00 < 1e-12, f"overlap = {overlap:.15f}, Gamma00 = {g00:.3e}"


@_timed(60.0)
def c08_oracle_equivalence():
    """Full Lindblad vs reduced non-Hermitian populations to 1e-6 (20 configs, N <= 6)."""
    rng = np.random.default_rng(20240808)
    worst = 0.0
    for _ in range(20):
        n = int(rng.integers(2, 7))
        cfg = ModelConfig(n, rng.uniform(0.0, 1.5), rng.uniform(0.0, PI),
                          gamma0=rng.uniform(0.2, 2.0), spacing=rng.uniform(0.1, 1.0))
        a0 = rng.normal(size=n) + 1j * rng.normal(size=n)
        a0 /= np.linalg.norm(a0)
        times = np.linspace(0.0, 4.0 / cfg.gamma0, 50)
        reduced = propagate(effective_hamiltonian(assemble(cfg)), a0, times)
        full = lindblad_oracle(cfg, a0, times)
        dev = max(np.max(np.abs(full.site_populations - reduced.site_populations)),
                  np.max(np.abs(full.ground_population - reduced.ground_population)))
        worst = max(worst, float(dev))
    return worst <= 1e-6, f"max population deviation = {worst:.3e}"


@_timed(10.0)
def c09_dissipationless_window():
    """Window of Gamma~_0 < 1e-6 around d = 0.75 with width > 0; > 1e-3 at d = 0.25, 0.5."""
    cfg = ModelConfig(11, 0.3, 0.3 * PI, gamma0=1.0, spacing=0.75)
    grid = np.round(np.arange(1, 201) * 0.005, 10)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        res = window_scan(cfg, grid, threshold=1e-6)
    gt = res.column("Gamma_tilde0")
    at = {d: float(gt[int(np.argmin(np.abs(grid - d)))]) for d in (0.25, 0.5, 0.75)}
    width = res.meta["window_width"]
    window_ok = width > 0
    ok = window_ok and at[0.25] > 1e-3 and at[0.5] > 1e-3
    return ok, (
        f"window width = {width:.4f}; Gamma~_0 at d=0.25: {at[0.25]:.3e}, 0.5: {at[0.5]:.3e}, "
        f"0.75: {at[0.75]:.3e} (min over scan {gt.min():.3e})"
    )


def _cli_deterministic(cfg, root):
    path = root / "c.json"
    path.write_text(cfg.to_json())
    outputs = []
    for tag in ("a", "b"):
        out = root / tag
        for command in ("couplings", "decay"):
            code = cli_main([command, str(path), "--out", str(out)])
            if code != 0:
                return False
        outputs.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
    return outputs[0] == outputs[1]


@_timed(60.0)
def c10_invariant_suites():
    """Chiral symmetry, Gamma PSD / rank 2, trace identities, parity, CLI determinism (50 configs)."""
    import contextlib
    import io

    rng = np.random.default_rng(1010)
    failures = {k: 0 for k in ("chiral", "psd_rank2", "trace_mm", "trace_tilde", "parity", "cli")}
    with tempfile.TemporaryDirectory() as tmp, contextlib.redirect_stdout(io.StringIO()):
        for i in range(50):
            n = int(rng.integers(2, 22))
            spacing = float(rng.choice([0.25, 0.75]))
            cfg = ModelConfig(n, rng.uniform(0.0, 2.0), rng.uniform(0.0, PI),
                              gamma0=rng.uniform(0.1, 2.0), spacing=spacing)
            c = assemble(cfg)
            scale = cfg.gamma0
            modes = diagonalize(c)
            e = np.sort(modes.energies)
            if np.max(np.abs(e + e[::-1])) > 1e-10 * max(scale, cfg.j0):
                failures["chiral"] += 1
            ev = np.sort(np.linalg.eigvalsh(c.gamma))[::-1]
            if ev[-1] < -1e-10 * scale or (n >= 3 and abs(ev[2]) > 1e-10 * scale * n):
                failures["psd_rank2"] += 1
            dm = decay_matrix(modes, c.gamma)
            if abs(np.trace(dm.gamma_mn) - n * scale) > 1e-10 * n * scale:
                failures["trace_mm"] += 1
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                cm = complex_diagonalize(effective_hamiltonian(c))
            if abs(cm.decay_rates.sum() - n * scale / 2) > 1e-10 * n * scale:
                failures["trace_tilde"] += 1
            if not check_parity(c.gamma):
                failures["parity"] += 1
            root = Path(tmp) / str(i)
            root.mkdir()
            if not _cli_deterministic(cfg, root):
                failures["cli"] += 1
    ok = not any(failures.values())
    return ok, "failures " + json.dumps(failures, sort_keys=True)


CRITERIA = [
    c01_winding_transition,
    c02_gap_closing,
    c03_ipr_minimum,
    c04_edge_decay_plateau,
    c05_bulk_decoupling,
    c06_finite_size_scaling,
    c07_analytic_state,
    c08_oracle_equivalence,
    c09_dissipationless_window,
    c10_invariant_suites,
]


def verdict_line(number, fn, ok, detail):
    return f"criterion {number:2d} [{'PASS' if ok else 'FAIL'}] {fn.__name__[4:]}: {detail}"


@pytest.mark.parametrize("number", range(1, 11))
def test_criterion(number):
    fn = CRITERIA[number - 1]
    ok, detail = fn()
    line = verdict_line(number, fn, ok, detail)
    VERDICTS[number] = line
    print(line)
    assert ok, line


if __name__ == "__main__":
    for number, fn in enumerate(CRITERIA, start=1):
        print(verdict_line(number, fn, *fn()), flush=True)
