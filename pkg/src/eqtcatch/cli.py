"""Command-line front end: analytic, transduce, schmidt, catch and pipeline.

Exit codes: 0 success, 2 usage or input error, 3 numeric failure.
Output goes to ``--out``, else ``$EQTCATCH_OUTPUT_DIR``, else the config's
``[output] directory``.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import warnings
from pathlib import Path

import numpy as np

from . import io
from .analytic import (
    ExpDecayPhoton,
    balance_time,
    fixed_coupling_efficiency,
    peak_time,
    tunable_efficiency,
    tunable_efficiency_limit,
    tunable_schedule,
)
from .catcher import DEFAULT_BOUNDS, CouplingSchedule, InputPhoton, catch, simulate_capture
from .config import ConfigError, RunConfig
from .dynamics import BiphotonKernel, biphoton_kernel
from .errors import EqtCatchError
from .fock import fock_correlator_oracle
from .model import TWO_PI, TimeGrid
from .schmidt import schmidt_decompose

OUTPUT_ENV = "EQTCATCH_OUTPUT_DIR"
EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3


class UsageError(Exception):
    pass


def _positive(text):
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not a number") from None
    if not (x > 0 and np.isfinite(x)):
        raise argparse.ArgumentTypeError(f"{text!r} must be a positive finite number")
    return x


def _count(text):
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from None
    if n < 2:
        raise argparse.ArgumentTypeError("need at least 2 points")
    return n


def output_dir(flag=None, config: RunConfig | None = None) -> Path:
    if flag:
        return Path(flag)
    env = os.environ.get(OUTPUT_ENV)
    if env:
        return Path(env)
    return Path(config.output_directory() if config is not None else "out")


# stages --------------------------------------------------------------------

def compute_kernel(cfg: RunConfig) -> BiphotonKernel:
    model = cfg.model()
    if cfg.engine() == "gaussian":
        return biphoton_kernel(model)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        G = fock_correlator_oracle(model, cfg.fock_cutoffs())
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    # correlator is |f|^2; its square root is the best available amplitude
    return BiphotonKernel.from_unnormalized(model.grid, np.sqrt(np.maximum(G, 0.0)).astype(complex), "fock",
                                            {"output_ports": model.output_ports})


def write_pump(path, cfg: RunConfig):
    grid, params, pump = cfg.grid(), cfg.system(), cfg.pump()
    mult = pump.multiplier(grid.times)
    io.write_table(path, ("t_ns", "multiplier", "g_MHz_over_2pi"), (grid.times / io.NS, mult, mult * params.g0 / io.MHZ_2PI))


def _stage_transduce(cfg: RunConfig, man: io.Manifest, chash: str):
    write_pump(man.path("pump.csv"), cfg)
    man.add("pump.csv", "pump")
    kernel = compute_kernel(cfg)
    io.write_kernel(man.path("kernel.csv"), kernel, chash)
    man.add("kernel.csv", "kernel")
    man.add("kernel.json", "kernel")
    man.results.update(generation_probability=kernel.generation_probability, engine=kernel.engine)
    return kernel


def _stage_schmidt(kernel: BiphotonKernel, man: io.Manifest, n_modes: int, magnitude_only: bool):
    if kernel.norm <= 0:
        raise EqtCatchError("kernel is identically zero; nothing to decompose")
    decomp = schmidt_decompose(kernel, magnitude_only=magnitude_only)
    for branch in ("optical", "microwave"):
        name = f"modes_{branch}.csv"
        io.write_modes(man.path(name), decomp, branch, n_modes)
        man.add(name, "modes")
    summary = io.modes_summary(decomp, n_modes)
    io.write_json(man.path("modes.json"), summary)
    man.add("modes.json", "modes")
    man.results.update(lambda_0=float(decomp.lambdas[0]), lambda_1=float(decomp.lambdas[1]),
                       entropy_nats=decomp.entropy)
    return decomp


def _stage_catch(photon: InputPhoton, kappa1_init, bounds, man: io.Manifest):
    run = catch(photon, kappa1_init, bounds)
    summary = io.write_capture(man.path("capture.csv"), run)
    man.add("capture.csv", "capture")
    man.add("capture.json", "capture")
    man.results.update(eta_final=summary["eta_final"], bookkeeping_residual=summary["bookkeeping_residual"])
    return run


def _persist_config(cfg: RunConfig, man: io.Manifest):
    man.path("config.ini").write_text(cfg.to_text(), encoding="utf-8")
    man.add("config.ini", "config")


def _fail(man: io.Manifest, exc: Exception):
    """Leave a failure marker next to whatever was already written."""
    man.path("FAILED").write_text(f"{type(exc).__name__}: {exc}\n", encoding="utf-8")
    man.add("FAILED", "failure")
    man.write(status="failed", error=f"{type(exc).__name__}: {exc}")


def run_pipeline(cfg: RunConfig, directory) -> io.Manifest:
    """dynamics -> Schmidt -> capture of the microwave zero mode, with a manifest."""
    chash = cfg.config_hash()
    man = io.Manifest(directory, chash, "pipeline")
    _persist_config(cfg, man)
    try:
        kernel = _stage_transduce(cfg, man, chash)
        decomp = _stage_schmidt(kernel, man, cfg.export_modes(), cfg.flag("schmidt", "magnitude_only"))
        photon = InputPhoton.from_samples(decomp.grid, decomp.microwave_modes[0])
        init, bounds = cfg.catcher_options()
        _stage_catch(photon, init, bounds, man)
    except EqtCatchError as exc:
        _fail(man, exc)
        raise
    man.write()
    return man


def analytic_curves(gamma, kappa1, t_max, n_points):
    """Closed-form fixed and tuned capture of an exponentially decaying photon, plus an ODE check."""
    photon = ExpDecayPhoton(gamma)
    grid = TimeGrid(0.0, t_max, n_points)
    t = grid.times
    tb = balance_time(photon, kappa1)
    eta_fixed = fixed_coupling_efficiency(photon, kappa1, t)
    eta_tuned = tunable_efficiency(photon, kappa1, t)
    k_tuned = np.where(t < tb, kappa1, tunable_schedule(photon, kappa1, np.maximum(t, tb)))
    sampled = InputPhoton.from_function(grid, photon.profile)
    run = simulate_capture(sampled, CouplingSchedule.constant(grid, kappa1))
    # the sampled photon is truncated at t_max; undo its renormalization
    eta_ode = run.eta * sampled.norm
    table = {
        "t_ns": t / io.NS,
        "fin_abs2_per_ns": np.abs(photon.profile(t)) ** 2 * io.NS,
        "eta_fixed": eta_fixed,
        "eta_fixed_ode": eta_ode,
        "eta_tunable": eta_tuned,
        "kappa1_fixed_MHz_over_2pi": np.full_like(t, kappa1 / io.MHZ_2PI),
        "kappa1_tunable_MHz_over_2pi": k_tuned / io.MHZ_2PI,
    }
    tm = peak_time(photon, kappa1)
    markers = {
        "gamma_MHz_over_2pi": gamma / io.MHZ_2PI,
        "kappa1_MHz_over_2pi": kappa1 / io.MHZ_2PI,
        "t_m_ns": tm / io.NS,
        "t_b_ns": tb / io.NS,
        "eta_max_fixed": float(fixed_coupling_efficiency(photon, kappa1, tm)),
        "eta_tunable_limit": tunable_efficiency_limit(photon, kappa1),
        "ode_max_relative_error": float(np.max(np.abs(eta_ode[1:] - eta_fixed[1:]) / eta_fixed[1:])),
    }
    return table, markers


# commands ------------------------------------------------------------------

def _load_config(args) -> RunConfig:
    if getattr(args, "from_manifest", None):
        mpath = Path(args.from_manifest)
        try:
            manifest = json.loads(mpath.read_text(encoding="utf-8"))
            cfg_name = next(e["path"] for e in manifest["files"] if e["panel"] == "config")
        except (OSError, ValueError, KeyError, StopIteration) as exc:
            raise UsageError(f"cannot use manifest {mpath}: {exc}") from None
        cfg = RunConfig.from_file(mpath.parent / cfg_name)
    elif getattr(args, "config", None):
        cfg = RunConfig.from_file(args.config)
    else:
        cfg = RunConfig.defaults()
    overrides = list(getattr(args, "set", None) or [])
    if getattr(args, "engine", None):
        overrides.append(("dynamics", "engine", args.engine))
    if getattr(args, "n_points", None):
        overrides.append(("grid", "n_points", str(args.n_points)))
    return cfg.with_overrides(overrides) if overrides else cfg


def cmd_analytic(args):
    gamma = TWO_PI * 1e6 * args.gamma_two_pi_MHz
    kappa1 = TWO_PI * 1e6 * args.kappa1_two_pi_MHz
    table, markers = analytic_curves(gamma, kappa1, args.t_max_ns * io.NS, args.n_points)
    man = io.Manifest(output_dir(args.out), None, "analytic")
    io.write_table(man.path("analytic.csv"), list(table), list(table.values()))
    man.add("analytic.csv", "fig1")
    io.write_json(man.path("analytic.json"), markers)
    man.add("analytic.json", "fig1")
    man.results.update(markers)
    man.write()
    print(f"t_m = {markers['t_m_ns']:.4f} ns  eta_max = {markers['eta_max_fixed']:.6f}  "
          f"t_b = {markers['t_b_ns']:.4f} ns  eta_tunable -> {markers['eta_tunable_limit']:.6f}")


def cmd_transduce(args):
    cfg = _load_config(args)
    chash = cfg.config_hash()
    man = io.Manifest(output_dir(args.out, cfg), chash, "transduce")
    _persist_config(cfg, man)
    try:
        kernel = _stage_transduce(cfg, man, chash)
    except EqtCatchError as exc:
        _fail(man, exc)
        raise
    man.write()
    print(f"kernel ({kernel.engine}) written; generation probability {kernel.generation_probability:.6g}")


def cmd_schmidt(args):
    kernel = io.read_kernel(args.kernel)
    man = io.Manifest(output_dir(args.out), None, "schmidt")
    decomp = _stage_schmidt(kernel, man, args.modes, args.magnitude_only)
    man.write()
    print(f"lambda = {', '.join(f'{x:.6f}' for x in decomp.lambdas[:args.modes])}  "
          f"S = {decomp.entropy:.6f} nats")


def cmd_catch(args):
    grid, amp = io.read_photon(args.photon, args.mode)
    photon = InputPhoton.from_samples(grid, amp)
    if photon.total_energy <= 0:
        raise UsageError(f"{args.photon}: photon has zero energy")
    init = TWO_PI * 1e6 * args.kappa1_init_two_pi_MHz
    lo = TWO_PI * 1e6 * args.kappa_min_two_pi_MHz
    hi = TWO_PI * 1e6 * args.kappa_max_two_pi_MHz
    if not lo <= init <= hi:
        raise UsageError("need kappa_min <= kappa1_init <= kappa_max")
    man = io.Manifest(output_dir(args.out), None, "catch")
    try:
        run = _stage_catch(photon, init, (lo, hi), man)
    except EqtCatchError as exc:
        _fail(man, exc)
        raise
    man.write()
    print(f"eta_final = {run.eta[-1]:.10f}")


def cmd_pipeline(args):
    cfg = _load_config(args)
    man = run_pipeline(cfg, output_dir(args.out, cfg))
    r = man.results
    print(f"lambda_0 = {r['lambda_0']:.6f}  lambda_1 = {r['lambda_1']:.6f}  S = {r['entropy_nats']:.6f}  "
          f"eta_final = {r['eta_final']:.6f}  -> {man.directory}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="eqtcatch", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def out_flag(p):
        p.add_argument("--out", help=f"output directory (overrides ${OUTPUT_ENV} and the config)")

    def config_flags(p):
        p.add_argument("--config", help="INI run configuration (defaults: reference device rates, Gaussian pump)")
        p.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE", help="override a config key")
        p.add_argument("--engine", choices=("gaussian", "fock"))
        p.add_argument("--n-points", type=_count, help="grid points (overrides [grid] n_points)")
        out_flag(p)

    p = sub.add_parser("analytic", help="closed-form capture curves of an exponentially decaying photon")
    p.add_argument("--gamma-two-pi-MHz", type=_positive, default=2.0)
    p.add_argument("--kappa1-two-pi-MHz", type=_positive, default=2.0)
    p.add_argument("--t-max-ns", type=_positive, default=1000.0)
    p.add_argument("--n-points", type=_count, default=1001)
    out_flag(p)
    p.set_defaults(func=cmd_analytic)

    p = sub.add_parser("transduce", help="pump envelope and two-photon kernel")
    config_flags(p)
    p.set_defaults(func=cmd_transduce)

    p = sub.add_parser("schmidt", help="Schmidt modes of an exported kernel")
    p.add_argument("--kernel", required=True, help="kernel CSV with its .json sidecar")
    p.add_argument("--modes", type=int, default=3, help="number of mode pairs to export")
    p.add_argument("--magnitude-only", action="store_true", help="decompose |K| instead of K")
    out_flag(p)
    p.set_defaults(func=cmd_schmidt)

    p = sub.add_parser("catch", help="capture an externally supplied photon")
    p.add_argument("--photon", required=True, help="CSV with t_ns, re[, im] (or a mode export)")
    p.add_argument("--mode", type=int, default=0, help="mode index k when reading a mode export")
    p.add_argument("--kappa1-init-two-pi-MHz", type=_positive, default=2.0)
    p.add_argument("--kappa-min-two-pi-MHz", type=float, default=DEFAULT_BOUNDS[0] / (TWO_PI * 1e6))
    p.add_argument("--kappa-max-two-pi-MHz", type=_positive, default=DEFAULT_BOUNDS[1] / (TWO_PI * 1e6))
    out_flag(p)
    p.set_defaults(func=cmd_catch)

    p = sub.add_parser("pipeline", help="kernel, Schmidt modes and capture in one run")
    config_flags(p)
    p.add_argument("--from-manifest", help="re-run the config recorded in a manifest")
    p.set_defaults(func=cmd_pipeline)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "schmidt" and args.modes < 1:
            parser.error("--modes must be at least 1")
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        args.func(args)
    except (UsageError, ConfigError, io.CsvParseError) as exc:
        print(f"eqtcatch {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except EqtCatchError as exc:
        print(f"eqtcatch {args.command}: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
