"""Command-line entry point: ``dtpt <command> <config.json> [options]``.

Exit codes: 0 success, 2 invalid input, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .bloch import bloch_sample, brillouin_grid, photon_coupling, winding_number
from .dynamics import effective_hamiltonian, propagate, window_scan
from .errors import ConfigError, GapClosed, NumericalError
from .model import ModelConfig, assemble
from .modes import decay_matrix, diagonalize, edge_state, ipr, mode_labels, nu_scaling_fit
from .results import config_hash, write_csv, write_json
from .sweep import RNG_NAME, Axis, SweepSpec, apply_axis, disorder_ensemble, phase_diagram

COMMANDS = (
    "couplings",
    "bands",
    "winding",
    "spectrum",
    "edgestate",
    "decay",
    "nu-fit",
    "window",
    "dynamics",
    "phase-diagram",
    "disorder",
)
SWEEP_KEYS = (
    "axis1",
    "axis2",
    "sizes",
    "branch",
    "width",
    "t_max",
    "t_count",
    "initial",
    "d_grid",
    "j0_grid",
    "bloch_emitters",
)


class Run:
    """Parsed inputs for one command invocation."""

    def __init__(self, args, config: ModelConfig, sweep: dict, raw: dict):
        self.args = args
        self.config = config
        self.sweep = sweep
        self.out = Path(args.out)
        self.plot = not args.no_plot
        effective = {
            "config": raw,
            "command": args.command,
            "seed": args.seed,
            "samples": args.samples,
            "grid": args.grid,
            "threshold": args.threshold,
        }
        self.hash = config_hash(effective)
        self.seed = None

    def csv(self, name, columns, rows):
        return write_csv(self.out / name, columns, rows, self.seed, self.hash)

    def json(self, name, payload):
        payload = dict(payload)
        payload["meta"] = {
            "version": __version__,
            "seed": self.seed,
            "config_hash": self.hash,
            "command": self.args.command,
        }
        return write_json(self.out / name, payload)


def _anchor(path: str, text: str, message: str) -> str:
    """Prefix ``message`` with the config line that holds the offending key."""
    for key in sorted(set(re.findall(r"[a-z][a-z0-9_]+", message)), key=message.find):
        m = re.search(r'"%s"\s*:' % re.escape(key), text)
        if m:
            return f"{path}:{text.count(chr(10), 0, m.start()) + 1}: {message}"
    return f"{path}:1: {message}"


def load_config(path: str):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"{path}:1: cannot read config ({exc.strerror})") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}: {exc.msg}") from exc
    try:
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        model = dict(raw)
        sweep = model.pop("sweep", {}) or {}
        if not isinstance(sweep, dict):
            raise ConfigError("sweep must be a JSON object")
        unknown = sorted(set(sweep) - set(SWEEP_KEYS))
        if unknown:
            raise ConfigError(f"unknown sweep keys: {', '.join(unknown)}")
        return ModelConfig.from_dict(model), sweep, raw
    except ConfigError as exc:
        raise ConfigError(_anchor(path, text, str(exc))) from exc


def parse_grid(spec: str) -> np.ndarray:
    """``start:stop:count`` (inclusive linspace) or a comma-separated list."""
    try:
        if ":" in spec:
            start, stop, count = spec.split(":")
            count = int(count)
            if count < 1:
                raise ValueError
            return np.linspace(float(start), float(stop), count)
        return np.array([float(v) for v in spec.split(",")])
    except ValueError as exc:
        raise ConfigError(f"bad grid {spec!r}; use start:stop:count or a,b,c") from exc


def _grid_from(block, name: str) -> np.ndarray:
    if not isinstance(block, dict) or not {"start", "stop", "count"} <= set(block):
        raise ConfigError(f"{name} needs start, stop and count")
    return np.linspace(float(block["start"]), float(block["stop"]), int(block["count"]))


def _grid(run: Run, key: str, default) -> np.ndarray:
    if run.args.grid:
        return parse_grid(run.args.grid)
    if key in run.sweep:
        return _grid_from(run.sweep[key], key)
    return np.asarray(default, dtype=float)


def _axis(block, name: str) -> Axis:
    if not isinstance(block, dict) or "name" not in block:
        raise ConfigError(f"{name} needs a name")
    return Axis(block["name"], _grid_from(block, name))


# --- commands -----------------------------------------------------------


def cmd_couplings(run: Run) -> str:
    c = assemble(run.config)
    i, j = np.triu_indices(c.n, k=1)
    rows = [(int(a) + 1, int(b) + 1, c.h[a, b], c.gamma[a, b]) for a, b in zip(i, j)]
    run.csv("couplings.csv", ("i", "j", "h", "gamma"), rows)
    return f"N={c.n} pairs={len(rows)}"


def _winding_or_none(config, samples):
    try:
        return winding_number(config, samples)
    except GapClosed:
        return None


def cmd_bands(run: Run) -> str:
    cfg = run.config
    photon_coupling(cfg)
    samples = run.args.samples or 4096
    s = bloch_sample(cfg, brillouin_grid(samples))
    run.csv("bands.csv", ("k", "hx", "hy", "e_plus", "e_minus"), zip(*s))
    j = cfg.j0 * (1.0 - np.cos(cfg.phi)), cfg.j0 * (1.0 + np.cos(cfg.phi))
    width = 2.0 * (j[0] + j[1])
    w = _winding_or_none(cfg, samples)
    run.json("bands.json", {
        "gap": 2.0 * abs(j[0] - j[1]),
        "width": width,
        "critical_gamma": width,
        "winding": w,
        "min_e_plus": float(s.energy_plus.min()),
    })
    if run.plot:
        from .plotting import line_plot

        line_plot(run.out / "bands.svg", s.k, {"e+": s.energy_plus, "e-": s.energy_minus},
                  "k", "energy")
    return f"W={'undefined' if w is None else w} gap={2.0 * abs(j[0] - j[1]):.6g}"


def cmd_winding(run: Run) -> str:
    samples = run.args.samples or 4096
    w = winding_number(run.config, samples)
    run.json("winding.json", {"winding": w, "samples": samples})
    return f"W={w}"


def cmd_spectrum(run: Run) -> str:
    cfg = run.config
    if cfg.gamma0 <= 0:
        raise ConfigError("spectrum scans J0/gamma0 and needs gamma0 > 0")
    grid = _grid(run, "j0_grid", np.linspace(0.05, 1.0, 96))
    rows, edge_ipr = [], []
    for x in grid:
        modes = diagonalize(assemble(apply_axis(cfg, "j0_over_gamma0", x)))
        rows.extend((float(x), int(m), float(e)) for m, e in zip(mode_labels(modes.n, modes.zero_index), modes.energies))
        edge_ipr.append(ipr(modes.vectors[:, modes.zero_index]))
    run.csv("spectrum.csv", ("J0_over_gamma0", "mode_index", "energy"), rows)
    if run.plot:
        from .plotting import line_plot, scatter_plot

        arr = np.array([(r[0], r[2]) for r in rows])
        scatter_plot(run.out / "spectrum.svg", arr[:, 0], arr[:, 1], "J0/gamma0", "energy")
        line_plot(run.out / "spectrum_ipr.svg", grid, {"IPR": edge_ipr}, "J0/gamma0", "edge IPR")
    k = int(np.argmin(edge_ipr))
    return f"points={grid.size} min_edge_ipr={edge_ipr[k]:.6g} at J0/gamma0={grid[k]:.6g}"


def cmd_edgestate(run: Run) -> str:
    modes = diagonalize(assemble(run.config))
    state = edge_state(modes, scale=run.config.rate_scale)
    sites = np.arange(1, modes.n + 1)
    if state.distribution.ndim == 1:
        run.csv("edge.csv", ("site", "prob"), zip(sites, state.distribution))
        values = [ipr(np.sqrt(state.distribution))]
        series = {"prob": state.distribution}
    else:
        p1, p2 = state.distribution
        run.csv("edge.csv", ("site", "prob", "prob_2"), zip(sites, p1, p2))
        values = [ipr(np.sqrt(p1)), ipr(np.sqrt(p2))]
        series = {"prob": p1, "prob_2": p2}
    if run.plot:
        from .plotting import line_plot

        line_plot(run.out / "edge.svg", sites, series, "site", "probability", marker="o")
    return "IPR=" + ",".join(f"{v:.6g}" for v in values)


def cmd_decay(run: Run) -> str:
    c = assemble(run.config)
    modes = diagonalize(c)
    dm = decay_matrix(modes, c.gamma)
    labels = mode_labels(modes.n, modes.zero_index)
    rows = [(int(labels[a]), int(labels[b]), dm.gamma_mn[a, b])
            for a in range(modes.n) for b in range(modes.n)]
    run.csv("decay.csv", ("m", "n", "gamma_mn"), rows)
    leak = np.abs(dm.bulk_leakage())
    if run.plot:
        from .plotting import line_plot

        line_plot(run.out / "decay.svg", np.delete(labels, modes.zero_index),
                  {"|Gamma_m0|": leak}, "m", "|Gamma_m0|", logy=True, marker="o")
    return f"Gamma00={dm.edge_decay:.6g} max_leak={leak.max():.6g}"


def cmd_nu_fit(run: Run) -> str:
    if run.args.grid:
        sizes = parse_grid(run.args.grid)
    else:
        sizes = np.asarray(run.sweep.get("sizes", list(range(17, 50, 4))), dtype=float)
    if np.any(sizes != np.round(sizes)):
        raise ConfigError("nu-fit sizes must be integers")
    branch = int(run.sweep.get("branch", 1))
    fit = nu_scaling_fit(run.config, sizes.astype(int), branch=branch)
    run.csv("nu.csv", ("N", "ln_abs_gamma_m0"), zip(fit.sizes, fit.ln_abs_gamma))
    run.json("nu.json", {"nu": fit.nu, "intercept": fit.intercept, "residual": fit.residual,
                         "branch": branch})
    if run.plot:
        from .plotting import line_plot

        line_plot(run.out / "nu.svg", fit.sizes, {"ln|Gamma_m0|": fit.ln_abs_gamma}, "N",
                  "ln|Gamma_m0/gamma0|", marker="o")
    return f"nu={fit.nu:.6g}"


def cmd_window(run: Run) -> str:
    grid = _grid(run, "d_grid", np.linspace(0.005, 1.0, 200))
    threshold = run.args.threshold if run.args.threshold is not None else 1e-6
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        res = window_scan(run.config, grid, threshold=threshold)
    run.csv("window.csv", res.columns, res.rows)
    run.json("window.json", {k: res.meta[k] for k in ("window_center", "window_width", "threshold")})
    if run.plot:
        from .plotting import line_plot

        line_plot(run.out / "window.svg", res.column("d_over_lambda0"),
                  {"Gamma00": res.column("Gamma00"), "Gamma_tilde0": res.column("Gamma_tilde0")},
                  "d/lambda0", "rate", logy=True)
    return f"window_width={res.meta['window_width']:.6g} center={res.meta['window_center']:.6g}"


def cmd_dynamics(run: Run) -> str:
    cfg = run.config
    t_max = float(run.sweep.get("t_max", 20.0 / cfg.rate_scale))
    t_count = int(run.sweep.get("t_count", 201))
    if t_max <= 0 or t_count < 1:
        raise ConfigError("t_max must be > 0 and t_count >= 1")
    initial = run.sweep.get("initial", 1)
    if isinstance(initial, list):
        a0 = np.asarray(initial, dtype=float).astype(complex)
        if a0.size != cfg.n_emitters:
            raise ConfigError("initial amplitudes must have n_emitters entries")
        norm = np.linalg.norm(a0)
        if norm == 0:
            raise ConfigError("initial amplitudes are all zero")
        a0 = a0 / norm
    else:
        site = int(initial)
        if not 1 <= site <= cfg.n_emitters:
            raise ConfigError(f"initial site must be in 1..{cfg.n_emitters}")
        a0 = np.zeros(cfg.n_emitters, dtype=complex)
        a0[site - 1] = 1.0
    times = np.linspace(0.0, t_max, t_count)
    traj = propagate(effective_hamiltonian(assemble(cfg)), a0, times)
    columns = ("t",) + tuple(f"p_{i}" for i in range(1, cfg.n_emitters + 1)) + ("p_ground", "norm")
    rows = [(t, *p, g, n) for t, p, g, n in
            zip(traj.times, traj.site_populations, traj.ground_population, traj.norm)]
    run.csv("trajectory.csv", columns, rows)
    if run.plot:
        from .plotting import line_plot

        line_plot(run.out / "trajectory.svg", traj.times,
                  {"p_1": traj.site_populations[:, 0], "norm": traj.norm}, "t", "population")
    return f"final_norm={traj.norm[-1]:.6g}"


def cmd_phase_diagram(run: Run) -> str:
    axis1 = (_axis(run.sweep["axis1"], "axis1") if "axis1" in run.sweep
             else Axis.linspace("j1_over_j2", 0.2, 2.0, 21))
    if run.args.grid:
        axis1 = Axis(axis1.name, parse_grid(run.args.grid))
    axis2 = (_axis(run.sweep["axis2"], "axis2") if "axis2" in run.sweep
             else Axis.linspace("gamma0_over_width", 0.0, 2.0, 21))
    spec = SweepSpec(run.config, axis1, axis2)
    res = phase_diagram(spec, bloch_emitters=int(run.sweep.get("bloch_emitters", 6)))
    run.csv("phase.csv", res.columns, res.rows)
    run.json("phase.json", res.meta)
    labels = res.column("label")
    if run.plot:
        from .plotting import label_map

        label_map(run.out / "phase.svg", axis1.values, axis2.values,
                  labels.reshape(axis1.values.size, axis2.values.size), axis1.name, axis2.name)
    counts = {name: int(np.sum(labels == name)) for name in sorted(set(labels.tolist()))}
    return " ".join(f"{k}={v}" for k, v in counts.items())


def cmd_disorder(run: Run) -> str:
    run.seed = run.args.seed if run.args.seed is not None else 0
    samples = run.args.samples or 200
    width = float(run.sweep.get("width", 0.01))
    threshold = run.args.threshold if run.args.threshold is not None else 1e-6
    stats = disorder_ensemble(run.config, width, samples, run.seed)
    rows = zip(range(samples), stats.values, stats.resamples)
    run.csv("disorder.csv", ("sample", "gamma_tilde0", "resamples"), rows)
    run.json("disorder.json", {
        "rng": RNG_NAME,
        "width": width,
        "samples": samples,
        "clean": stats.clean_value,
        "mean": stats.mean,
        "median": stats.median,
        "p05": stats.p05,
        "p95": stats.p95,
        "bootstrap_median_se": stats.bootstrap_median_se(),
        "total_resamples": stats.total_resamples,
        "threshold": threshold,
        "median_below_threshold": stats.median < threshold * run.config.rate_scale,
    })
    if run.plot:
        from .plotting import histogram

        histogram(run.out / "disorder.svg", stats.values, "Gamma_tilde0")
    return f"median={stats.median:.6g} p05={stats.p05:.6g} p95={stats.p95:.6g}"


HANDLERS = {
    "couplings": cmd_couplings,
    "bands": cmd_bands,
    "winding": cmd_winding,
    "spectrum": cmd_spectrum,
    "edgestate": cmd_edgestate,
    "decay": cmd_decay,
    "nu-fit": cmd_nu_fit,
    "window": cmd_window,
    "dynamics": cmd_dynamics,
    "phase-diagram": cmd_phase_diagram,
    "disorder": cmd_disorder,
}


def _u64(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dtpt", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("config", help="model config JSON (optional 'sweep' block)")
    p.add_argument("--out", default=".", help="output directory (default: .)")
    p.add_argument("--seed", type=_u64, default=None)
    p.add_argument("--samples", type=_positive_int, default=None,
                   help="ensemble size (disorder) or k samples (bands, winding)")
    p.add_argument("--grid", default=None, help="start:stop:count or a,b,c")
    p.add_argument("--threshold", type=float, default=None,
                   help="dissipationless threshold in units of gamma0 (default 1e-6)")
    p.add_argument("--no-plot", action="store_true", help="skip SVG figures")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config, sweep, raw = load_config(args.config)
        run = Run(args, config, sweep, raw)
        run.out.mkdir(parents=True, exist_ok=True)
        summary = HANDLERS[args.command](run)
    except NumericalError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    except (ValueError, TypeError) as exc:
        message = str(exc)
        if not message.startswith(f"{args.config}:"):
            try:
                text = Path(args.config).read_text()
            except OSError:
                text = ""
            message = _anchor(args.config, text, message)
        print(f"error: {message}", file=sys.stderr)
        return 2
    print(summary)
    return 0


if __name__ == "__main__":
    sys.exit(main())
