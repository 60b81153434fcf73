"""Command-line driver: solve | verify | simulate | critical | sweep.

One command per process; every output file starts with a comment header
recording the tool version and the config hash, and identical
(config, seed) pairs produce byte-identical CSVs.

Exit codes: 0 ok, 1 config error, 2 non-convergence, 3 speed threshold
violated, 4 time-step stability refused.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bounds import (DegenerateIntervalError, SpeedBelowThresholdError,
                     build_bounds, verify_bound_inequalities)
from .config import ConfigError, RunConfig, load_config, parse_kernel
from .critical import ScalarCriticalSpec, critical_wave
from .kernels import DelayKernel
from .models import (LotkaVolterraModel, ModelError, NicholsonModel, ZouModel,
                     weak_coupling_check)
from .pdesim import (BoundaryContaminationError, InapplicableError, NoFrontError,
                     SimulationDivergedError, StabilityError, advection_check,
                     nonexistence_probe, simulate, spreading_speed)
from .presets import default_speed, preset_names
from .rectangles import (NotContractingError, find_lv_epsilon, limit_verdict,
                         lv_family, nicholson_family, verify_strict_contraction,
                         zou_family)
from .waves import SolveOptions, normalize_phase, solve_wave, tail_ratio

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NO_CONVERGENCE = 2
EXIT_THRESHOLD = 3
EXIT_STABILITY = 4


def _fmt(v) -> str:
    return format(float(v), ".17g")


def _write_csv(path: Path, header: dict, names: list[str], columns) -> None:
    with open(path, "w") as fh:
        for key, val in header.items():
            fh.write(f"# {key}: {val}\n")
        fh.write(",".join(names) + "\n")
        for row in zip(*columns):
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _write_text(path: Path, header: dict, body: str) -> None:
    with open(path, "w") as fh:
        for key, val in header.items():
            fh.write(f"# {key}: {val}\n")
        fh.write(body)
        if not body.endswith("\n"):
            fh.write("\n")


def _header(cfg: RunConfig, **extra) -> dict:
    base = {"tool": f"frontkit {__version__}", "config": cfg.digest, "seed": cfg.seed}
    base.update(extra)
    return base


def _provenance(cfg: "RunConfig") -> str:
    return f"frontkit {__version__}; config {cfg.digest}; seed {cfg.seed}"


def _plot_lines(path: Path, cfg: "RunConfig", x, rows, labels, xlabel, ylabel) -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    fig, ax = plt.subplots(figsize=(7, 4))
    for row, label in zip(rows, labels):
        ax.plot(x, row, label=label)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Description": _provenance(cfg)})
    plt.close(fig)


def _plot_heatmap(path: Path, cfg: "RunConfig", field, species: int) -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    fig, ax = plt.subplots(figsize=(7, 4))
    img = ax.imshow(field.snapshots[:, species, :], aspect="auto", origin="lower",
                    extent=[field.x[0], field.x[-1], field.times[0], field.times[-1]])
    fig.colorbar(img, ax=ax, label=f"u_{species + 1}")
    ax.set_xlabel("x")
    ax.set_ylabel("t")
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Description": _provenance(cfg)})
    plt.close(fig)


def _solve_speed(cfg: RunConfig, blk: dict) -> float:
    if "speed" in blk:
        return float(blk["speed"])
    preset = cfg.raw.get("model")
    if isinstance(preset, dict):
        preset = preset.get("preset")
    if isinstance(preset, str):
        speed = default_speed(preset)
        if speed is not None:
            return speed
    raise ConfigError("solve.speed", "missing wave speed")


def _solve_options(blk: dict) -> SolveOptions:
    grid = blk.get("grid", {})
    return SolveOptions(
        xi_min=grid.get("xi_min"), xi_max=grid.get("xi_max"), h=grid.get("h"),
        omega=float(blk.get("omega", 0.5)),
        tol_update=float(blk.get("tol_update", 1e-8)),
        tol_residual=float(blk.get("tol_residual", 1e-5)),
        max_iter=int(blk.get("max_iter", 10000)))


def cmd_solve(cfg: RunConfig) -> int:
    model = cfg.model()
    if not isinstance(model, LotkaVolterraModel):
        raise ConfigError("model", "solve drives the competition-type wave system")
    blk = cfg.block("solve")
    speed = _solve_speed(cfg, blk)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    try:
        profile, report = solve_wave(model, speed, _solve_options(blk))
    except (SpeedBelowThresholdError, DegenerateIntervalError) as exc:
        print(f"threshold violation: {exc}", file=sys.stderr)
        return EXIT_THRESHOLD

    ratios = tail_ratio(profile, probe_offset=5.0)
    target = report.target
    try:
        shifted, phase = normalize_phase(profile, 0.5 * target[0])
    except ValueError:
        # no usable half-height crossing (degenerate run): emit unshifted
        from .waves import PhaseInfo
        shifted, phase = profile, PhaseInfo(0.0, (), False)

    names = ["xi"] + [f"psi_{i + 1}" for i in range(model.n)]
    header = _header(cfg, speed=_fmt(speed), beta=_fmt(report.beta),
                     eta=_fmt(report.eta), q=_fmt(report.q),
                     gamma1=" ".join(_fmt(g) for g in report.gamma1),
                     tol_update=_fmt(1e-8 if "tol_update" not in blk else blk["tol_update"]),
                     tol_residual=_fmt(1e-5 if "tol_residual" not in blk else blk["tol_residual"]),
                     phase_shift=_fmt(phase.shift))
    _write_csv(out / "profile.csv", header, names,
               [shifted.xi] + [shifted.values[i] for i in range(model.n)])

    body = [report.format(),
            "tail ratios at 5 decay lengths: "
            + " ".join(_fmt(v) for v in ratios),
            f"phase shift applied to profile.csv: {_fmt(phase.shift)}"]

    verdict_line = "limit verdict: skipped (weak-coupling condition unavailable)"
    try:
        holds, _ = weak_coupling_check(model)
    except ModelError:
        holds = False
    if holds:
        try:
            eps = blk.get("rectangle_epsilon")
            eps = float(eps) if eps is not None else find_lv_epsilon(model, seed=cfg.seed)
            family = lv_family(model, eps)
            ok, xi_tr, y_tr = limit_verdict(profile, family)
            verdict_line = (f"limit verdict (epsilon = {_fmt(eps)}): "
                            f"{'converges to target' if ok else 'NOT certified'}")
            _write_csv(out / "y_trace.csv", _header(cfg, epsilon=_fmt(eps)),
                       ["xi", "y"], [xi_tr, y_tr])
        except NotContractingError as exc:
            verdict_line = f"limit verdict: skipped ({exc})"
    body.append(verdict_line)
    _write_text(out / "report.txt", _header(cfg), "\n".join(body))

    if cfg.plot:
        _plot_lines(out / "profile.svg", cfg, shifted.xi,
                    [shifted.values[i] for i in range(model.n)],
                    [f"psi_{i + 1}" for i in range(model.n)], "xi", "profile")

    print(f"solve: converged={report.converged} residual={report.final_residual:.3e} "
          f"-> {out / 'profile.csv'}")
    return EXIT_OK if report.converged else EXIT_NO_CONVERGENCE


def cmd_verify(cfg: RunConfig) -> int:
    model = cfg.model()
    blk = cfg.block("verify")
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    all_ok = True
    body = []

    if isinstance(model, LotkaVolterraModel):
        speed = float(blk["speed"]) if "speed" in blk else _solve_speed(cfg, blk)
        try:
            pair = build_bounds(model, speed)
            rep = verify_bound_inequalities(pair, model)
            body.append(rep.format())
            all_ok &= rep.passed
        except (SpeedBelowThresholdError, DegenerateIntervalError) as exc:
            print(f"threshold violation: {exc}", file=sys.stderr)
            return EXIT_THRESHOLD

    rect = blk.get("rectangle", {})
    y_levels = int(rect.get("y_levels", 9))
    samples = int(rect.get("face_samples", 1000))
    y_grid = np.linspace(0.1, 0.9, y_levels)
    try:
        if isinstance(model, LotkaVolterraModel):
            eps = rect.get("epsilon")
            eps = float(eps) if eps is not None else find_lv_epsilon(model, seed=cfg.seed)
            family = lv_family(model, eps)
        elif isinstance(model, NicholsonModel):
            family = nicholson_family(float(rect.get("epsilon", 0.5)))
        elif isinstance(model, ZouModel):
            family = zou_family(float(rect.get("k", 1.0)))
        else:
            raise ConfigError("model", "no rectangle family for this model kind")
        crep = verify_strict_contraction(family, model, y_samples=y_grid,
                                         face_samples=samples, seed=cfg.seed)
        body.append(crep.format())
        all_ok &= crep.passed
    except NotContractingError as exc:
        body.append(f"rectangle family refused: {exc}")
        all_ok = False

    _write_text(out / "verify.txt", _header(cfg), "\n\n".join(body))
    print(f"verify: {'pass' if all_ok else 'FAIL'} -> {out / 'verify.txt'}")
    return EXIT_OK if all_ok else EXIT_NO_CONVERGENCE


def _initial_condition(blk: dict, n: int):
    ic = blk.get("initial", {"bump": {}})
    if "bump" in ic:
        b = ic["bump"]
        amp = float(b.get("amplitude", 0.5))
        width = float(b.get("width", 2.0))
        center = float(b.get("center", 0.0))
        species = int(b.get("species", 0))
        if not 0 <= species < n:
            raise ConfigError("simulate.initial.bump.species",
                              f"index {species} out of range for {n} species")

        def history(xs, s):
            out = np.zeros((n, len(xs)))
            out[species] = amp * np.exp(-((xs - center) / width) ** 2)
            return out

        return history
    if "constant" in ic:
        vals = np.asarray(ic["constant"], dtype=float)
        if vals.shape != (n,):
            raise ConfigError("simulate.initial.constant",
                              f"need {n} values, got {vals.shape}")

        def history(xs, s):
            return np.repeat(vals[:, None], len(xs), axis=1)

        return history
    raise ConfigError("simulate.initial", f"unknown initial condition {ic!r}")


def cmd_simulate(cfg: RunConfig) -> int:
    model = cfg.model()
    blk = cfg.block("simulate")
    task = blk.get("task", "spreading")
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    try:
        if task == "nonexistence":
            speed = float(blk["speed"])
            try:
                probe = nonexistence_probe(model, speed,
                                           window=tuple(blk.get("window", (30.0, 90.0))))
            except InapplicableError as exc:
                print(f"threshold: {exc}", file=sys.stderr)
                return EXIT_THRESHOLD
            _write_text(out / "probe.txt", _header(cfg), probe.format())
            print(f"simulate/nonexistence: {probe.verdict} -> {out / 'probe.txt'}")
            return EXIT_OK if probe.verdict == "nonexistence-consistent" else EXIT_NO_CONVERGENCE

        if task == "advection":
            if not isinstance(model, LotkaVolterraModel):
                raise ConfigError("model", "advection check needs a competition model")
            speed = _solve_speed(cfg, blk)
            solve_blk = cfg.block("solve")
            try:
                profile, report = solve_wave(model, speed, _solve_options(solve_blk))
            except (SpeedBelowThresholdError, DegenerateIntervalError) as exc:
                print(f"threshold violation: {exc}", file=sys.stderr)
                return EXIT_THRESHOLD
            T = float(blk.get("horizon", 20.0))
            try:
                rep = advection_check(profile, model, T, dx=float(blk.get("dx", 0.05)))
            except (BoundaryContaminationError, SimulationDivergedError) as exc:
                print(f"advection run invalid: {exc}", file=sys.stderr)
                return EXIT_NO_CONVERGENCE
            body = (f"advection check over T = {_fmt(T)}\n"
                    f"  drift error: {_fmt(rep.drift_error)} (shift {_fmt(rep.shift)}, "
                    f"expected {_fmt(rep.expected_shift)})\n"
                    f"  shape error (aligned sup-norm): {_fmt(rep.shape_error)}")
            _write_text(out / "advection.txt", _header(cfg), body)
            print(f"simulate/advection: drift={rep.drift_error:.3e} "
                  f"shape={rep.shape_error:.3e} -> {out / 'advection.txt'}")
            return EXIT_OK

        # plain evolution and spreading-speed measurement
        history = _initial_condition(blk, model.n)
        x_span = tuple(blk.get("x_span", (-100.0, 100.0)))
        dx = float(blk.get("dx", 0.1))
        horizon = float(blk.get("horizon", 40.0))
        field = simulate(model, history, horizon, x_span, dx,
                         dt=blk.get("dt"), snapshot_dt=blk.get("snapshot_dt"))
        index_rows = []
        for k, t in enumerate(field.times):
            name = f"snap_{k:04d}.csv"
            _write_csv(out / name, _header(cfg, t=_fmt(t)),
                       ["x"] + [f"u_{i + 1}" for i in range(field.n)],
                       [field.x] + [field.snapshots[k][i] for i in range(field.n)])
            index_rows.append((t, name))
        with open(out / "index.csv", "w") as fh:
            for key, val in _header(cfg).items():
                fh.write(f"# {key}: {val}\n")
            fh.write("t,filename\n")
            for t, name in index_rows:
                fh.write(f"{_fmt(t)},{name}\n")
        body = [f"snapshots: {len(field.times)}", f"min value: {_fmt(field.min_value)}"]
        status = EXIT_OK
        if task == "spreading":
            level = float(blk.get("level", 0.5))
            window = tuple(blk.get("window", (0.5 * horizon, horizon)))
            try:
                speed = spreading_speed(field, level, window,
                                        species=int(blk.get("species", 0)))
            except NoFrontError as exc:
                print(f"no front: {exc}", file=sys.stderr)
                status = EXIT_NO_CONVERGENCE
            else:
                body.append(f"measured spreading speed at level {_fmt(level)} "
                            f"over t in {window}: {_fmt(speed)}")
                print(f"simulate/spreading: speed={speed:.4f}")
        _write_text(out / "simulate.txt", _header(cfg), "\n".join(body))
        if cfg.plot:
            _plot_heatmap(out / "field.svg", cfg, field, int(blk.get("species", 0)))
        return status
    except SimulationDivergedError as exc:
        print(f"simulation diverged: {exc}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    except StabilityError as exc:
        print(f"stability: {exc}", file=sys.stderr)
        return EXIT_STABILITY


def cmd_critical(cfg: RunConfig) -> int:
    blk = cfg.block("critical")
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if "kernel" in blk:
        kernel = parse_kernel(blk["kernel"], "critical.kernel")
    else:
        b = float(blk.get("b", 1.0))
        tau = float(blk.get("tau", 0.0))
        if b >= 1.0 or tau == 0.0:
            kernel = DelayKernel.point_mass(0.0)
        else:
            kernel = DelayKernel.from_atoms([(-tau, 1.0 - b), (0.0, b)])
    try:
        spec = ScalarCriticalSpec(d=float(blk.get("d", 1.0)), r=float(blk.get("r", 1.0)),
                                  kernel=kernel, speed_tol=float(blk.get("speed_tol", 1e-3)))
    except ValueError as exc:
        raise ConfigError("critical", str(exc)) from exc
    result = critical_wave(spec, h=float(blk.get("h", 0.02)))

    for k, prof in enumerate(result.profiles):
        _write_csv(out / f"profile_{k:03d}.csv",
                   _header(cfg, speed=_fmt(result.steps[k].speed)),
                   ["xi", "phi"], [prof.xi, prof.values[0]])
    _write_csv(out / "diagnostics.csv", _header(cfg, critical_speed=_fmt(spec.critical_speed)),
               ["c_n", "delta_n", "residual_n", "iterations"],
               [[s.speed for s in result.steps],
                [s.delta for s in result.steps],
                [s.residual for s in result.steps],
                [float(s.iterations) for s in result.steps]])
    if cfg.plot and result.profiles:
        _plot_lines(out / "critical.svg", cfg, result.profiles[-1].xi,
                    [result.profiles[-1].values[0]], ["phi"], "xi", "profile")
    print(f"critical: converged={result.converged} steps={len(result.steps)} "
          f"final c={result.steps[-1].speed:.6f}")
    return EXIT_OK if result.converged else EXIT_NO_CONVERGENCE


def cmd_sweep(cfg: RunConfig) -> int:
    model = cfg.model()
    if not isinstance(model, LotkaVolterraModel):
        raise ConfigError("model", "sweep drives the competition-type wave system")
    blk = cfg.block("sweep")
    if "speeds" in blk:
        speeds = [float(v) for v in blk["speeds"]]
    else:
        rng = blk.get("range")
        if not rng:
            raise ConfigError("sweep", "need 'speeds' or 'range'")
        speeds = list(np.linspace(float(rng["min"]), float(rng["max"]),
                                  int(rng.get("count", 5))))
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    opts = _solve_options(blk)
    rows = []
    any_fail = False
    for c in speeds:
        try:
            profile, report = solve_wave(model, c, opts)
            rows.append((c, 1.0 if report.converged else 0.0, report.final_residual,
                         float(report.overshoot.max()), float(report.iterations)))
            any_fail |= not report.converged
        except (SpeedBelowThresholdError, DegenerateIntervalError):
            rows.append((c, 0.0, float("nan"), float("nan"), 0.0))
            any_fail = True
    _write_csv(out / "sweep.csv", _header(cfg),
               ["c", "converged", "residual", "max_overshoot", "iterations"],
               list(zip(*rows)))
    print(f"sweep: {len(speeds)} speeds -> {out / 'sweep.csv'}")
    return EXIT_OK if not any_fail else EXIT_NO_CONVERGENCE


_COMMANDS = {
    "solve": cmd_solve,
    "verify": cmd_verify,
    "simulate": cmd_simulate,
    "critical": cmd_critical,
    "sweep": cmd_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="frontkit",
                                     description="traveling-wave solver and verifier "
                                                 "for delayed competition systems")
    parser.add_argument("--version", action="version", version=f"frontkit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--preset", choices=preset_names(), help="named model preset")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--seed", type=int, default=None, help="root seed (default 0)")
        p.add_argument("--plot", action="store_true", help="emit SVG plots")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        raw = load_config(args.config) if args.config else {}
        if args.preset:
            raw["model"] = {"preset": args.preset}
        cfg = RunConfig(
            raw=raw,
            seed=args.seed if args.seed is not None else int(raw.get("seed", 0)),
            out_dir=args.out if args.out is not None else raw.get("out_dir", "out"),
            plot=bool(args.plot or raw.get("plot", False)))
        return _COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
