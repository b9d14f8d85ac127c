"""Command-line entry point: ``propertime <subcommand> [--config FILE] ...``.

Every subcommand reads the YAML run configuration (shipped defaults when
``--config`` is absent), writes its artifacts into the output directory and
prints a JSON summary on stdout.  Exit codes: 0 success, 1 a requested check
failed, 2 configuration or I/O error, 3 numerical non-convergence.  Errors are
reported as JSON on stderr.
"""
import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__, analysis, checks, io, operators, povm, specfun
from .config import ConfigError, axis_samples, load_config, parse_angle

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


class NonConvergence(ArithmeticError):
    pass


def _range(text):
    try:
        lo, hi = (float(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO:HI, got {text!r}") from None
    return [lo, hi]


def _out(cfg, name):
    return cfg.output_dir / f"{name}.{cfg.output_format}"


def _overrides(args):
    ov = {}
    if getattr(args, "out", None):
        ov.setdefault("output", {})["directory"] = str(Path(args.out).resolve())
    if getattr(args, "format", None):
        ov.setdefault("output", {})["format"] = args.format
    if getattr(args, "workers", None):
        ov["workers"] = args.workers
    return ov


# -- subcommands ---------------------------------------------------------------------

def cmd_spectrum(cfg, args):
    sec = cfg.section("spectrum")
    phi = parse_angle(args.phi) if args.phi is not None else cfg.phi
    n_lo, n_hi = (args.n_range or sec.get("n_range", [-3, 3]))
    spec = operators.extension_spectrum(phi, int(n_lo), int(n_hi), cfg.m)
    path = io.emit(spec, cfg.output_format, _out(cfg, "spectrum"))
    return EXIT_OK, {"phi": phi, "n": [int(n) for n in spec.n], "z": [float(v) for v in spec.z],
                     "file": str(path)}


def _state(cfg):
    state, grid = cfg.build_state()
    return state, grid


def cmd_time_density(cfg, args):
    state, grid = _state(cfg)
    if grid is not None and grid.chart != "spherical":
        raise ConfigError("time density of a file state needs a spherical-chart state file", "state.file")
    tau = args.tau if args.tau is not None else cfg.taus[0]
    prof = povm.time_density(state, tau, cfg.axis("t"), grid=grid, l_max=cfg.truncations["l_max"])
    path = io.emit(prof, cfg.output_format, _out(cfg, "time_density"))
    return EXIT_OK, {"total_mass": prof.total_mass, "warnings": list(prof.warnings), "file": str(path)}


def _position_kw(cfg):
    t = cfg.truncations
    return {"lambda_max": t["Lambda_max"], "n_lambda": t["n_lambda"], "m_z_window": t["m_z_window"]}


def cmd_position_density(cfg, args):
    state, grid = _state(cfg)
    if grid is not None and grid.chart != "hyperbolic":
        raise ConfigError("position density of a file state needs a hyperbolic-chart state file", "state.file")
    tau = args.tau if args.tau is not None else cfg.taus[0]
    grid = grid if grid is not None else cfg.grid("position")
    prof = povm.position_density(state, tau, cfg.axis("z"), grid=grid, **_position_kw(cfg))
    path = io.emit(prof, cfg.output_format, _out(cfg, "position_density"))
    return EXIT_OK, {"total_mass": prof.total_mass, "warnings": list(prof.warnings), "file": str(path)}


def cmd_overlap(cfg, args):
    sec = cfg.section("overlap")
    axis = args.axis or sec.get("axis", "z")
    rng = args.range or sec.get("range", [0.0, 10.0])
    step = args.step or sec.get("step", 0.1)
    sign, tau, m = sec.get("sign", "+"), float(sec.get("tau", 0.0)), cfg.m
    d = axis_samples({"range": rng, "step": step}, "overlap")
    rows = []
    if axis == "z":
        for dz in d:
            v = povm.position_overlap(0.0, dz, tau=tau, sign=sign, m=m)
            rows.append({"dz": dz, "re": v.real, "im": v.imag, "sinc": float(specfun.sinc(m * np.pi * dz / 2))})
        err = max(abs(complex(r["re"], r["im"]) - r["sinc"]) for r in rows)
    else:
        w = float(sec.get("width", 1.0))
        for dt in d:
            r = povm.time_overlap_smeared(povm.GaussianWindow(0.0, w), povm.GaussianWindow(dt, w), sign, tau, m)
            rows.append({"dt": dt, "re": r.analytic.real, "im": r.analytic.imag,
                         "direct_re": r.direct.real, "direct_im": r.direct.imag})
        err = max(abs(complex(r["re"], r["im"]) - complex(r["direct_re"], r["direct_im"])) for r in rows)
    path = cfg.output_dir / f"overlap_{axis}.{cfg.output_format}"
    if cfg.output_format == "csv":
        io.write_rows_csv(rows, list(rows[0]), path, ["axis, units, mass, sign, tau",
                                                      f"{axis}, 1/m, {io.fmt(m)}, {sign}, {io.fmt(tau)}"])
    else:
        io.write_json({"axis": axis, "units": "1/m", "mass": m, "sign": sign, "tau": tau, "rows": rows}, path)
    return EXIT_OK, {"axis": axis, "points": len(rows), "max_reference_error": err, "file": str(path)}


def cmd_admissibility(cfg, args):
    state, _ = _state(cfg)
    tau = args.tau if args.tau is not None else cfg.taus[0]
    rep = analysis.admissibility_check(state, tau=tau)
    path = io.write_json(rep.to_dict(), cfg.output_dir / "admissibility.json")
    code = EXIT_OK
    if args.expect == "admissible" and not rep.admissible:
        code = EXIT_CHECK
    if args.expect == "inadmissible" and rep.admissible:
        code = EXIT_CHECK
    return code, {"admissible": rep.admissible, "verdicts": rep.verdicts, "file": str(path)}


def cmd_evolve(cfg, args):
    state, grid = _state(cfg)
    grid = grid if grid is not None else cfg.grid("position")
    sw = analysis.propertime_sweep(state, cfg.taus, cfg.axis("z"), workers=cfg.workers, grid=grid,
                                   **_position_kw(cfg))
    files = []
    for k, prof in enumerate(sw.profiles):
        files.append(str(io.emit(prof, cfg.output_format, cfg.output_dir / f"position_tau{k:03d}.{cfg.output_format}")))
    rows = sw.summary_rows()
    files.append(str(io.write_rows_csv(rows, list(rows[0]), cfg.output_dir / "sweep_summary.csv",
                                       ["units, mass", f"1/m, {io.fmt(cfg.m)}"])))
    files.append(str(io.write_json(sw.to_dict(), cfg.output_dir / "sweep.json")))
    ref = analysis.momentum_expectation(state, 3, grid) / state.m
    code = EXIT_OK
    if args.check:
        rel = abs(sw.slope - ref) / max(abs(ref), 1e-300)
        code = EXIT_OK if sw.fit_residual < 0.01 and (abs(ref) < 1e-12 or rel < 0.01) else EXIT_CHECK
    return code, {"slope": sw.slope, "momentum_over_m": ref, "fit_residual": sw.fit_residual,
                  "warnings": list(sw.warnings), "files": files}


def cmd_covariance(cfg, args):
    state, _ = _state(cfg)
    sec = cfg.section("covariance")
    chi = args.rapidity if args.rapidity is not None else float(sec.get("rapidity", 0.3))
    tau = float(sec.get("tau", 1.0))
    grids = (cfg.grid("hyperbolic"), cfg.grid("spherical"))
    rep = analysis.covariance_check(state, chi, tau, grids)
    out = rep.to_dict()
    if sec.get("refine", True):
        out["refinement"] = analysis.covariance_convergence(state, chi, tau, grids=grids)
    path = io.write_json(out, cfg.output_dir / "covariance.json")
    if not rep.converged:
        raise NonConvergence(f"stencil did not converge for rapidity {chi}")
    ok = rep.discrepancy < args.tolerance
    if "refinement" in out:
        ok = ok and min(out["refinement"]["orders"]) >= 2
    return (EXIT_OK if ok else EXIT_CHECK), {"discrepancy": rep.discrepancy, "file": str(path)}


def cmd_verify(cfg, args):
    if args.list:
        return EXIT_OK, {"checks": list(checks.REGISTRY)}
    only = args.only or cfg.section("verify").get("only")
    ctx = checks.Context(m=cfg.m, level=cfg.section("verify").get("level", "quick"), workers=cfg.workers)
    results = checks.run_checks(ctx, only)
    for r in results:
        print(r.line(), file=sys.stderr)
    rows = [{"name": r.name, "passed": r.passed, "value": r.value, "threshold": r.threshold,
             "detail": r.detail} for r in results]
    path = io.write_json({"version": __version__, "checks": rows}, cfg.output_dir / "verify.json")
    n_fail = sum(not r.passed for r in results)
    return (EXIT_OK if n_fail == 0 else EXIT_CHECK), {"passed": len(results) - n_fail, "failed": n_fail,
                                                        "file": str(path)}


COMMANDS = {
    "spectrum": cmd_spectrum,
    "time-density": cmd_time_density,
    "position-density": cmd_position_density,
    "overlap": cmd_overlap,
    "admissibility": cmd_admissibility,
    "evolve": cmd_evolve,
    "covariance": cmd_covariance,
    "verify": cmd_verify,
}


def build_parser():
    p = argparse.ArgumentParser(prog="propertime", description="Proper-time localization numerics.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config", help="YAML run configuration (defaults are shipped)")
        sp.add_argument("--out", help="output directory (overrides output.directory)")
        sp.add_argument("--format", choices=["csv", "json"])
        return sp

    sp = add("spectrum", "extension eigenvalue ladder")
    sp.add_argument("--phi", help="extension parameter, number or e.g. pi, -pi/2")
    sp.add_argument("--n-range", nargs=2, type=int, metavar=("N_MIN", "N_MAX"), help="half-open n range")
    for name, help_ in (("time-density", "time POVM density p(t)"),
                        ("position-density", "position POVM density p(z; tau)")):
        sp = add(name, help_)
        sp.add_argument("--tau", type=float)
    sp = add("overlap", "position or smeared time kernel scan")
    sp.add_argument("--axis", choices=["z", "t"])
    sp.add_argument("--range", type=_range, help="LO:HI of the separation")
    sp.add_argument("--step", type=float)
    sp = add("admissibility", "domain checks on the configured state")
    sp.add_argument("--tau", type=float)
    sp.add_argument("--expect", choices=["any", "admissible", "inadmissible"], default="any")
    sp = add("evolve", "proper-time sweep of the position density")
    sp.add_argument("--workers", type=int, help="threads over tau (results do not depend on it)")
    sp.add_argument("--check", action="store_true", help="fail unless the drift matches <Pi3>/m")
    sp = add("covariance", "boost covariance of the position quadratic form")
    sp.add_argument("--rapidity", type=float)
    sp.add_argument("--tolerance", type=float, default=1e-3)
    sp = add("verify", "run the invariant suite")
    sp.add_argument("--only", nargs="+", metavar="CHECK")
    sp.add_argument("--list", action="store_true")
    return p


def _fail(code, kind, message, **extra):
    print(json.dumps({"error": kind, "message": message, **extra}, sort_keys=True), file=sys.stderr)
    return code


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, _overrides(args))
        code, summary = COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, "config", str(exc), path=exc.path)
    except io.ArtifactIOError as exc:
        return _fail(EXIT_CONFIG, "io", str(exc))
    except (NonConvergence, specfun.ConicalEvaluationError) as exc:
        return _fail(EXIT_NUMERIC, "non-convergence", str(exc))
    except ArithmeticError as exc:
        return _fail(EXIT_NUMERIC, "numerical", str(exc))
    except ValueError as exc:
        return _fail(EXIT_CONFIG, "invalid-input", str(exc))
    print(json.dumps({"command": args.command, "exit": code, **summary}, sort_keys=True, default=float))
    return code


if __name__ == "__main__":
    sys.exit(main())
