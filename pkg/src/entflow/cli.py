"""Command-line interface.

Subcommands: ``gellmann`` (dump a generator basis), ``evolve`` (one
trajectory -> CSV + summary JSON), ``sweep`` (basin map -> CSV + metadata
JSON), ``verify`` (invariant suite).  Options may come from a YAML/JSON
config document (``--config``); explicit flags win over the file, which
wins over built-in defaults.  A metadata sidecar written by ``evolve`` or
``sweep`` can itself be fed back as ``--config`` to reproduce the run.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 verification failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np
import yaml

from . import __version__, io as eio, verify as verify_mod
from .dynamics import EvolutionConfig, NumericalFailure, evolve
from .entanglement import PairSelector, classify_separability, default_eta
from .gellmann import generate
from .hilbert import DenseOperator, as_dims, fidelity
from .sweep import GridSpec, SweepSpec, classify_basin, run_sweep
from .statelib import StateExprError, build_state, parse_state_expr

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_VERIFY = 4


class ConfigError(ValueError):
    """Invalid flag, config value, or combination thereof."""


EVOLVE_DEFAULTS = {
    "dims": [2, 2, 2],
    "state": None,
    "pair": [1, 2],
    "eta": None,
    "step": 1e-3,
    "smax": 50.0,
    "record_stride": 100,
    "renormalize": True,
    "early_stop_tau": None,
    "hamiltonian": None,
    "targets": [],
    "basin_tol": 1e-3,
    "seed": verify_mod.DEFAULT_SEED,
    "out": None,
}

SWEEP_DEFAULTS = {
    "dims": [2, 2, 2],
    "base": "ghz",
    "dir1": "bell1(pi)",
    "dir2": "bell2(pi)",
    "eps1": {"min": -1e-3, "max": 1e-3, "count": 41},
    "eps2": {"min": -1e-3, "max": 1e-3, "count": 41},
    "pair": [1, 2],
    "eta": None,
    "step": 1e-3,
    "smax": 50.0,
    "basin_tol": 1e-3,
    "workers": 1,
    "seed": verify_mod.DEFAULT_SEED,
    "out": None,
}


def _load_config(path) -> dict:
    try:
        with open(path) as fh:
            doc = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError("cannot read config file: %s" % exc)
    except yaml.YAMLError as exc:
        raise ConfigError("config file is not valid YAML/JSON: %s" % exc)
    if not isinstance(doc, dict):
        raise ConfigError("config file must hold a mapping")
    # accept a metadata sidecar: its run configuration sits under "config"
    if "config" in doc and isinstance(doc["config"], dict):
        doc = doc["config"]
    doc.pop("command", None)
    return doc


def _merge(defaults: dict, config: dict, flags: dict) -> dict:
    merged = dict(defaults)
    for key, value in config.items():
        if key not in defaults:
            raise ConfigError("unknown config field %r" % key)
        merged[key] = value
    for key, value in flags.items():
        if value is not None:
            merged[key] = value
    return merged


def _parse_pair(value) -> tuple:
    if isinstance(value, str):
        parts = value.split(",")
    else:
        parts = list(value)
    if len(parts) != 2:
        raise ConfigError("pair must be two subsystem indices, got %r" % (value,))
    try:
        first, second = (int(p) for p in parts)
    except (TypeError, ValueError):
        raise ConfigError("pair entries must be integers, got %r" % (value,))
    return first, second


def _parse_dims(value) -> tuple:
    parts = value.split(",") if isinstance(value, str) else list(value)
    try:
        dims = tuple(int(p) for p in parts)
    except (TypeError, ValueError):
        raise ConfigError("dims must be integers, got %r" % (value,))
    return dims


def _parse_grid(value) -> dict:
    if isinstance(value, str):
        parts = value.split(",")
        if len(parts) != 3:
            raise ConfigError("grid must be min,max,count, got %r" % value)
        return {"min": float(parts[0]), "max": float(parts[1]), "count": int(parts[2])}
    if isinstance(value, dict) and {"min", "max", "count"} <= set(value):
        return {"min": float(value["min"]), "max": float(value["max"]), "count": int(value["count"])}
    raise ConfigError("grid must be min,max,count or a {min,max,count} mapping, got %r" % (value,))


def _wrap(fn, *args) -> "callable":
    """Translate domain errors into exit codes."""

    def run():
        try:
            return fn(*args)
        except (ConfigError, StateExprError, ValueError) as exc:
            print("error: %s" % exc, file=sys.stderr)
            return EXIT_CONFIG
        except NumericalFailure as exc:
            print("numerical failure: %s" % exc, file=sys.stderr)
            return EXIT_NUMERICAL

    return run


def _build_evolution(cfg: dict, dims) -> EvolutionConfig:
    first, second = _parse_pair(cfg["pair"])
    eta = cfg["eta"]
    pair = PairSelector.for_dims(dims, first, second, None if eta is None else float(eta))
    ham = None
    if cfg.get("hamiltonian"):
        try:
            matrix = np.load(cfg["hamiltonian"])
        except OSError as exc:
            raise ConfigError("cannot read hamiltonian: %s" % exc)
        ham = DenseOperator(np.asarray(matrix, dtype=np.complex128), dims)
    early = cfg.get("early_stop_tau")
    return EvolutionConfig(
        pair=pair,
        hamiltonian=ham,
        step=float(cfg["step"]),
        duration=float(cfg["smax"]),
        record_stride=int(cfg.get("record_stride", 100)),
        renormalize_each_step=bool(cfg.get("renormalize", True)),
        early_stop_tau=None if early is None else float(early),
    )


def _out_prefix(cfg) -> Path:
    if not cfg.get("out"):
        raise ConfigError("an output prefix is required (--out)")
    prefix = Path(cfg["out"])
    if prefix.suffix in (".csv", ".json"):
        prefix = prefix.with_suffix("")
    prefix.parent.mkdir(parents=True, exist_ok=True)
    return prefix


def cmd_gellmann(args) -> int:
    if args.d < 2:
        raise ConfigError("--d must be at least 2, got %d" % args.d)
    basis = generate(args.d)
    lines = ["# generalized Gell-Mann basis, d = %d, %d matrices" % (basis.d, basis.count)]
    for a, matrix in enumerate(basis, start=1):
        lines.append("lambda_%d" % a)
        for row in matrix:
            lines.append("  " + "  ".join("%+.17g%+.17gj" % (v.real, v.imag) for v in row))
    text = "\n".join(lines) + "\n"
    if args.out:
        try:
            Path(args.out).write_text(text)
        except OSError as exc:
            raise ConfigError("cannot write %s: %s" % (args.out, exc))
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_evolve(args) -> int:
    config_doc = _load_config(args.config) if args.config else {}
    flags = {
        "dims": args.dims,
        "state": args.state,
        "pair": args.pair,
        "eta": args.eta,
        "step": args.step,
        "smax": args.smax,
        "record_stride": args.record_stride,
        "renormalize": args.renormalize,
        "early_stop_tau": args.early_stop_tau,
        "hamiltonian": args.hamiltonian,
        "targets": args.target or None,
        "basin_tol": args.basin_tol,
        "seed": args.seed,
        "out": args.out,
    }
    cfg = _merge(EVOLVE_DEFAULTS, config_doc, flags)
    if args.dims is not None:
        cfg["dims"] = _parse_dims(args.dims)
    dims = as_dims(_parse_dims(cfg["dims"]))
    if not cfg["state"]:
        raise ConfigError("an initial state expression is required (--state)")
    psi0 = build_state(parse_state_expr(cfg["state"], dims), dims)
    evolution = _build_evolution(cfg, dims)
    prefix = _out_prefix(cfg)

    start = time.perf_counter()
    trajectory = evolve(psi0, evolution)
    wall = time.perf_counter() - start

    final = trajectory.final_report
    fidelities = {}
    for target in cfg["targets"]:
        target_state = build_state(parse_state_expr(target, dims), dims)
        fidelities[target] = fidelity(trajectory.final_state, target_state)

    eio.write_trajectory_csv(prefix.with_suffix(".csv"), trajectory)
    resolved = dict(cfg)
    resolved["dims"] = list(dims.dims)
    resolved["pair"] = list(_parse_pair(cfg["pair"]))
    resolved["eta"] = evolution.pair.eta
    resolved["out"] = str(prefix)
    from . import kernels

    summary = {
        "command": "evolve",
        "config": resolved,
        "version": __version__,
        "backend": kernels.BACKEND,
        "wall_time_s": wall,
        "s_final": trajectory.samples[-1].s,
        "k": list(final.bloch_lengths),
        "tau": {
            name: final.tau_of(a, b)
            for name, (a, b) in zip(eio.tau_column_names(dims), eio.tau_pairs(dims))
        },
        "basin": classify_basin(final, float(cfg["basin_tol"]), evolution.pair, dims),
        "separability": classify_separability(final, float(cfg["basin_tol"]), dims),
        "fidelity": fidelities,
        "max_norm_deviation": trajectory.max_norm_deviation,
    }
    eio.write_json(prefix.with_suffix(".json"), summary)
    print("wrote %s and %s" % (prefix.with_suffix(".csv"), prefix.with_suffix(".json")))
    return EXIT_OK


def cmd_sweep(args) -> int:
    config_doc = _load_config(args.config) if args.config else {}
    flags = {
        "dims": args.dims,
        "base": args.base,
        "dir1": args.dir1,
        "dir2": args.dir2,
        "eps1": args.eps1,
        "eps2": args.eps2,
        "pair": args.pair,
        "eta": args.eta,
        "step": args.step,
        "smax": args.smax,
        "basin_tol": args.basin_tol,
        "workers": args.workers,
        "seed": args.seed,
        "out": args.out,
    }
    cfg = _merge(SWEEP_DEFAULTS, config_doc, flags)
    dims = as_dims(_parse_dims(cfg["dims"]))
    grid1 = _parse_grid(cfg["eps1"])
    grid2 = _parse_grid(cfg["eps2"])
    evolution = _build_evolution({**cfg, "record_stride": 1, "renormalize": True}, dims)
    spec = SweepSpec(
        base=parse_state_expr(cfg["base"], dims),
        direction1=parse_state_expr(cfg["dir1"], dims),
        direction2=parse_state_expr(cfg["dir2"], dims),
        grid1=GridSpec(grid1["min"], grid1["max"], grid1["count"]),
        grid2=GridSpec(grid2["min"], grid2["max"], grid2["count"]),
        evolution=evolution,
        dims=dims,
        basin_tol=float(cfg["basin_tol"]),
    )
    workers = int(cfg["workers"])
    prefix = _out_prefix(cfg)

    start = time.perf_counter()
    result = run_sweep(spec, workers=workers)
    wall = time.perf_counter() - start

    eio.write_sweep_csv(prefix.with_suffix(".csv"), result)
    basins = {}
    for cell in result.cells:
        basins[cell.basin] = basins.get(cell.basin, 0) + 1
    resolved = dict(cfg)
    resolved["dims"] = list(dims.dims)
    resolved["pair"] = list(_parse_pair(cfg["pair"]))
    resolved["eta"] = evolution.pair.eta
    resolved["eps1"] = grid1
    resolved["eps2"] = grid2
    resolved["out"] = str(prefix)
    from . import kernels

    metadata = {
        "command": "sweep",
        "config": resolved,
        "version": __version__,
        "backend": kernels.BACKEND,
        "wall_time_s": wall,
        "workers": workers,
        "n_cells": len(result.cells),
        "basins": basins,
    }
    eio.write_json(prefix.with_suffix(".json"), metadata)
    print("wrote %s and %s" % (prefix.with_suffix(".csv"), prefix.with_suffix(".json")))
    return EXIT_OK


def cmd_verify(args) -> int:
    try:
        results = verify_mod.run_checks(seed=args.seed, step=args.step)
    except Exception as exc:  # a crashed check is a failed suite
        print("verification suite crashed: %s" % exc, file=sys.stderr)
        return EXIT_VERIFY
    print(verify_mod.format_table(results))
    return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="entflow",
        description="Deterministic pairwise disentanglement flows on multipartite states.",
    )
    parser.add_argument("--version", action="version", version="entflow %s" % __version__)
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--dims", help="subsystem dimensions, e.g. 2,2,2")
    common.add_argument("--pair", help="damped subsystem pair, e.g. 1,2")
    common.add_argument("--eta", type=float, help="pair coefficient (default 1/3 for qubit pairs)")
    common.add_argument("--step", type=float, help="integrator step in s")
    common.add_argument("--smax", type=float, help="final dimensionless time")
    common.add_argument("--seed", type=int, help="seed recorded in metadata / used by verify")
    common.add_argument("--out", help="output path prefix")
    common.add_argument("--config", help="YAML/JSON config document (flags win)")
    common.add_argument("--basin-tol", dest="basin_tol", type=float, help="basin / separability threshold")

    p_gell = sub.add_parser("gellmann", help="dump a generalized Gell-Mann basis")
    p_gell.add_argument("--d", type=int, required=True, help="subsystem dimension (>= 2)")
    p_gell.add_argument("--out", help="write to this file instead of stdout")
    p_gell.set_defaults(fn=cmd_gellmann)

    p_evolve = sub.add_parser("evolve", parents=[common], help="integrate one trajectory")
    p_evolve.add_argument("--state", help="initial state expression")
    p_evolve.add_argument("--record-stride", dest="record_stride", type=int)
    p_evolve.add_argument(
        "--no-renormalize", dest="renormalize", action="store_const", const=False,
        help="disable per-step renormalization",
    )
    p_evolve.add_argument("--early-stop-tau", dest="early_stop_tau", type=float)
    p_evolve.add_argument("--hamiltonian", help=".npy file with a Hermitian matrix in units of hbar*gamma")
    p_evolve.add_argument(
        "--target", action="append", help="state expression; final fidelity reported (repeatable)"
    )
    p_evolve.set_defaults(fn=cmd_evolve, renormalize=None)

    p_sweep = sub.add_parser("sweep", parents=[common], help="two-parameter basin map")
    p_sweep.add_argument("--base", help="base state expression")
    p_sweep.add_argument("--dir1", help="first perturbation direction expression")
    p_sweep.add_argument("--dir2", help="second perturbation direction expression")
    p_sweep.add_argument("--eps1", help="grid min,max,count for eps1")
    p_sweep.add_argument("--eps2", help="grid min,max,count for eps2")
    p_sweep.add_argument("--workers", type=int, help="parallel worker processes")
    p_sweep.set_defaults(fn=cmd_sweep)

    p_verify = sub.add_parser("verify", help="run the invariant suite")
    p_verify.add_argument("--seed", type=int, default=verify_mod.DEFAULT_SEED)
    p_verify.add_argument("--step", type=float, help="override the dynamical checks' step size")
    p_verify.set_defaults(fn=cmd_verify)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return _wrap(args.fn, args)()


if __name__ == "__main__":
    sys.exit(main())
