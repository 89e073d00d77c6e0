"""Command-line entry point.

Exit status: 0 on success, 2 on configuration or input errors, 3 when a
run aborts numerically (non-finite values or the CFL guard), in which case
the ledger up to the abort is written first.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

import numpy as np

from . import presets
from .config import ConfigError, SimConfig, parse_config, serialize
from .diagnostics import Cutoff, concentration_scan, local_energy_audit, phi
from .io import SnapshotError, read_snapshot, render_heatmap, write_events, write_ledger, write_snapshot
from .params import validate
from .solver import CFLError, FlowState, NumericalAbort, run

EXIT_OK, EXIT_CONFIG, EXIT_ABORT = 0, 2, 3

log = logging.getLogger("nematic2d")


def initial_state(cfg: SimConfig, grid) -> FlowState:
    ini = cfg.initial
    if ini.preset == "random":
        return presets.random_state(grid, seed=ini.seed, spectrum_slope=ini.spectrum_slope,
                                    amplitude=ini.amplitude,
                                    director_amplitude=ini.director_amplitude)
    if ini.preset == "taylor_green":
        return presets.taylor_green(grid, ini.amplitude, ini.director)
    if ini.preset == "geodesic":
        return presets.geodesic(grid, ini.k)
    if ini.preset == "bubble":
        scale = ini.scale if ini.scale is not None else grid.length / 100
        return presets.bubble(grid, scale, ini.degree, ini.center)
    snap = read_snapshot(ini.path, expected_n=grid.n)
    if not np.isclose(snap.grid.length, grid.length):
        raise SnapshotError(f"{ini.path}: period {snap.grid.length} differs from config {grid.length}")
    return snap.state


def _snapshot_name(step: int) -> str:
    return f"snap_{step:08d}.bin"


class _WindowAuditor:
    """Streams local energy audits over consecutive sampling intervals."""

    def __init__(self, grid, coeffs, windows, c_audit, interval):
        self.grid, self.coeffs, self.c_audit = grid, coeffs, c_audit
        self.cutoffs = [Cutoff((w[0], w[1]), w[2], w[3]) for w in windows]
        self.interval = max(int(interval), 1)
        self.buffer: list[FlowState] = []
        self.results = []

    def __call__(self, state, step):
        self.buffer.append(state.copy())
        if step > 0 and step % self.interval == 0:
            self.flush()

    def flush(self):
        if len(self.buffer) >= 2:
            for cut in self.cutoffs:
                audit = local_energy_audit(self.grid, self.buffer, self.coeffs, cut)
                self.results.append((self.buffer[0].t, self.buffer[-1].t, cut, audit))
        self.buffer = self.buffer[-1:]

    def write(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t_start", "t_end", "cx", "cy", "inner_r", "outer_r",
                        "lhs", "flux_bound", "alignment", "passes"])
            for t0, t1, cut, a in self.results:
                w.writerow([repr(t0), repr(t1), repr(cut.center[0]), repr(cut.center[1]),
                            repr(cut.inner_r), repr(cut.outer_r), repr(a.lhs),
                            repr(a.flux_bound), repr(a.alignment),
                            "true" if a.passes(self.c_audit) else "false"])


class _ProbeRecorder:
    """Keeps only the states that some Phi probe's time window needs."""

    def __init__(self, probes, dt):
        self.windows = [(p[2] - p[3] ** 2 - dt, p[2] + dt) for p in probes]
        self.states: list[FlowState] = []

    def __call__(self, state, step):
        if any(a <= state.t <= b for a, b in self.windows):
            self.states.append(state.copy())


def cmd_run(args) -> int:
    try:
        cfg = parse_config(Path(args.config).read_text(), allow_invalid=args.allow_invalid)
    except (ConfigError, OSError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(args.out or cfg.output.dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.ini").write_text(serialize(cfg))

    grid = cfg.make_grid()
    try:
        state0 = initial_state(cfg, grid)
    except (SnapshotError, OSError, ValueError) as e:
        print(f"initial condition error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    solver_cfg = cfg.solver_config()
    steps, every = cfg.time.steps, cfg.time.snapshot_every
    mode = cfg.mode.kind

    def snap(state, step):
        write_snapshot(state, out / _snapshot_name(step), grid, mode)

    hooks = [(every if every > 0 else 0, snap)]
    diag = cfg.diagnostics
    auditor = None
    if diag.local_windows:
        auditor = _WindowAuditor(grid, cfg.coefficients, diag.local_windows, diag.c_audit,
                                 every if every > 0 else steps)
        hooks.append((cfg.time.ledger_every, auditor))
    probes = None
    if diag.phi_probes:
        probes = _ProbeRecorder(diag.phi_probes, cfg.time.dt)
        hooks.append((1, probes))

    try:
        final, ledger = run(grid, state0, cfg.coefficients, solver_cfg, hooks=hooks,
                            ledger_every=cfg.time.ledger_every,
                            scan_radii=diag.concentration_radii,
                            threshold=diag.threshold, flag_tol=diag.flag_tol)
    except (NumericalAbort, CFLError) as e:
        if e.ledger is not None:
            write_ledger(e.ledger, out / "ledger.csv", out / "events.csv")
        if e.state is not None:
            snap(e.state, e.step - 1)
        print(f"numerical abort at step {e.step}: {e}", file=sys.stderr)
        return EXIT_ABORT

    if every == 0 or steps % every != 0:
        snap(final, steps)
    write_ledger(ledger, out / "ledger.csv", out / "events.csv")
    if auditor is not None:
        auditor.flush()
        auditor.write(out / "local_energy.csv")
    if probes is not None:
        with open(out / "phi.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x", "y", "t0", "r", "phi"])
            for x, y, t0, r in diag.phi_probes:
                try:
                    value = repr(phi(grid, probes.states, cfg.coefficients, (x, y), t0, r,
                                     mode, cfg.mode.epsilon))
                except ValueError as e:
                    log.warning("phi probe (%g, %g, %g, %g) skipped: %s", x, y, t0, r, e)
                    value = "nan"
                w.writerow([repr(x), repr(y), repr(t0), repr(r), value])

    last = ledger.rows[-1]
    print(f"t = {last.t:.6g}  E = {last.E:.10g}  steps = {steps}  "
          f"flags = {len(ledger.flags)}  output = {out}")
    return EXIT_OK


def cmd_validate(args) -> int:
    try:
        cfg = parse_config(Path(args.config).read_text(), allow_invalid=True)
    except (ConfigError, OSError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    report = validate(cfg.coefficients)
    c = cfg.coefficients
    for name in ("parodi_ok", "lambda1_negative", "alignment_nonneg",
                 "viscosity_positive", "stretching_ok"):
        print(f"{name:20s} {'ok' if getattr(report, name) else 'FAIL'}")
    for m in report.messages:
        print(f"  {m}")
    if report.lambda1_negative:
        print(f"lambda1 = {c.lambda1:.6g}  lambda2 = {c.lambda2:.6g}")
    return EXIT_OK if report.valid else EXIT_CONFIG


def _load(path):
    try:
        return read_snapshot(path)
    except (SnapshotError, OSError) as e:
        print(f"snapshot error: {e}", file=sys.stderr)
        return None


def cmd_scan(args) -> int:
    snap = _load(args.snapshot)
    if snap is None:
        return EXIT_CONFIG
    try:
        events = concentration_scan(snap.grid, snap.state, args.radius, args.threshold,
                                    args.flag_tol)
    except ValueError as e:
        print(f"scan error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    write_events(events, args.out if args.out else sys.stdout)
    return EXIT_OK


def _pair(text):
    parts = [float(p) for p in text.split(",")]
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("expected X,Y")
    return tuple(parts)


def cmd_phi(args) -> int:
    directory = Path(args.snapshot_dir)
    try:
        cfg = parse_config((directory / "config.ini").read_text(), allow_invalid=True)
    except (ConfigError, OSError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    snaps = []
    for p in sorted(directory.glob("snap_*.bin")):
        s = _load(p)
        if s is None:
            return EXIT_CONFIG
        snaps.append(s)
    if not snaps:
        print(f"no snapshots in {directory}", file=sys.stderr)
        return EXIT_CONFIG
    snaps.sort(key=lambda s: s.state.t)
    try:
        value = phi(snaps[0].grid, [s.state for s in snaps], cfg.coefficients, args.center,
                    args.t0, args.r, cfg.mode.kind, cfg.mode.epsilon)
    except ValueError as e:
        print(f"phi error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    print(repr(value))
    return EXIT_OK


def scalar_field(name: str, grid, state: FlowState) -> np.ndarray:
    if name == "speed":
        return np.sqrt(np.sum(state.u**2, axis=0))
    if name == "energy_density":
        return np.sum(state.u**2, axis=0) + np.sum(grid.gradient(state.d)**2, axis=(0, 1))
    if name == "unit_violation":
        return np.sqrt(np.sum(state.d**2, axis=0)) - 1.0
    raise ValueError(f"unknown field {name!r}")


def cmd_render(args) -> int:
    snap = _load(args.snapshot)
    if snap is None:
        return EXIT_CONFIG
    palette = args.palette or ("signed" if args.field == "unit_violation" else "grayscale")
    render_heatmap(scalar_field(args.field, snap.grid, snap.state), args.out, palette)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nematic2d",
                                description="Planar Ericksen-Leslie flows on the torus.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a simulation from a config file")
    r.add_argument("config")
    r.add_argument("--allow-invalid", action="store_true",
                   help="only warn about inadmissible coefficients")
    r.add_argument("--out", help="output directory (overrides [output] dir)")
    r.set_defaults(func=cmd_run)

    v = sub.add_parser("validate", help="check the coefficient set of a config")
    v.add_argument("config")
    v.set_defaults(func=cmd_validate)

    s = sub.add_parser("scan", help="energy-concentration scan of one snapshot")
    s.add_argument("snapshot")
    s.add_argument("--radius", type=float, required=True)
    s.add_argument("--threshold", type=float, default=8 * np.pi)
    s.add_argument("--flag-tol", type=float, default=0.01)
    s.add_argument("--out", help="events CSV (default stdout)")
    s.set_defaults(func=cmd_scan)

    f = sub.add_parser("phi", help="scale-invariant monitor from a run directory")
    f.add_argument("snapshot_dir")
    f.add_argument("--center", type=_pair, required=True)
    f.add_argument("--t0", type=float, required=True)
    f.add_argument("--r", type=float, required=True)
    f.set_defaults(func=cmd_phi)

    h = sub.add_parser("render", help="PPM heatmap of a scalar field")
    h.add_argument("snapshot")
    h.add_argument("--field", choices=("speed", "energy_density", "unit_violation"),
                   required=True)
    h.add_argument("--out", required=True)
    h.add_argument("--palette", choices=("grayscale", "signed"))
    h.set_defaults(func=cmd_render)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
