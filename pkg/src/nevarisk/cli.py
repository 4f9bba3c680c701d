"""Command-line front end.

    nevarisk validate NETWORK
    nevarisk run [CONFIG] [--network P] [--model NAME] [--param k=v] [--shock A]
    nevarisk sweep [CONFIG] [--shock-grid START:STOP:STEP] [--param k=v1,v2,...]
    nevarisk generate [SPEC] [--seed S] --out DIR

CONFIG is a YAML or JSON file with optional blocks ``network``, ``model``,
``solver``, ``shock``, ``sweep`` and ``output``; flags override it. Exit
status is 0 on success, 1 for an invalid network (``validate``) or a
non-converged solve, and 2 for unreadable or ill-formed input.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np
import yaml

from . import dataio
from .network import NetworkValidationError
from .solver import SolverConfig
from .stress import SweepSpec, run_scenario, shock_grid, sweep
from .valuation import TUNABLE, ModelError, ValuationModel, calibrate

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2

PARAM_ALIASES = {"gamma_tilde": "gamma_sys", "beta_tilde": "beta_sys", "T": "tau",
                 "maturity": "tau"}


class InputError(Exception):
    """Configuration or input problem, reported with exit status 2."""


def _load_config(path):
    if path is None:
        return {}, Path.cwd()
    path = Path(path)
    try:
        doc = yaml.safe_load(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc.strerror}") from None
    except yaml.YAMLError as exc:
        raise InputError(f"cannot parse config {path}: {exc}") from None
    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise InputError(f"config {path} must be a mapping")
    return doc, path.parent


def _number(text, what):
    try:
        return float(text)
    except (TypeError, ValueError):
        raise InputError(f"{what}: expected a number, got {text!r}") from None


def _param_name(name):
    name = name.strip()
    return PARAM_ALIASES.get(name, name)


def _parse_param_flags(flags):
    out = {}
    for flag in flags or []:
        name, sep, values = flag.partition("=")
        if not sep or not name.strip():
            raise InputError(f"--param expects name=v1,v2,..., got {flag!r}")
        out[_param_name(name)] = [_number(v, f"--param {name}") for v in values.split(",")]
    return out


def _build_model(block, variant_flag, overrides):
    if block is None:
        block = {}
    if isinstance(block, str):
        block = {"variant": block}
    if not isinstance(block, dict):
        raise InputError("model block must be a mapping or a variant name")
    block = dict(block)
    variant = variant_flag or block.pop("variant", None) or block.pop("name", None)
    block.pop("variant", None)
    block.pop("name", None)
    if variant is None:
        raise InputError("model block needs a 'variant'")
    params = {_param_name(k): v for k, v in block.items()}
    params.update(overrides)
    try:
        template = ValuationModel(variant)
        allowed = TUNABLE[template.variant]
        unknown = sorted(set(params) - set(allowed))
        if unknown:
            raise InputError(
                f"model {template.variant}: unknown parameter(s) {', '.join(unknown)}; "
                f"allowed: {', '.join(allowed) or 'none'}"
            )
        values = {k: (np.asarray(v, dtype=np.float64) if isinstance(v, list) else v)
                  for k, v in params.items()}
        return calibrate(ValuationModel(template.variant, **values))
    except (ModelError, TypeError, ValueError) as exc:
        raise InputError(f"invalid model block: {exc}") from None


def _build_solver(block, args):
    block = dict(block or {})
    unknown = set(block) - {"epsilon", "max_iterations", "max_iter", "rel_epsilon"}
    if unknown:
        raise InputError(f"unknown solver setting(s): {', '.join(sorted(unknown))}")
    eps = args.epsilon if args.epsilon is not None else block.get("epsilon")
    max_iter = args.max_iter if args.max_iter is not None else \
        block.get("max_iterations", block.get("max_iter", 100_000))
    try:
        return SolverConfig(
            epsilon=None if eps is None else float(eps),
            max_iterations=int(max_iter),
            record_trajectory=False,
            rel_epsilon=float(block.get("rel_epsilon", 1e-9)),
        )
    except (TypeError, ValueError) as exc:
        raise InputError(f"invalid solver block: {exc}") from None


def _load_network(args, config, base):
    path = args.network or config.get("network")
    if path is None:
        raise InputError("no network given (use --network or a 'network' entry)")
    path = Path(path)
    if args.network is None and not path.is_absolute():
        path = base / path
    try:
        return dataio.load_network(path)
    except (dataio.NetworkFormatError, NetworkValidationError) as exc:
        raise InputError(str(exc)) from None


def _parse_grid(text):
    if isinstance(text, dict):
        parts = [text.get("start", 0.0), text.get("stop"), text.get("step")]
    elif isinstance(text, (list, tuple)):
        return [_number(v, "shock grid") for v in text]
    else:
        parts = str(text).split(":")
        if len(parts) != 3:
            raise InputError(f"shock grid must be start:stop:step, got {text!r}")
    start, stop, step = (_number(p, "shock grid") for p in parts)
    try:
        return list(shock_grid(start, stop, step))
    except ValueError as exc:
        raise InputError(str(exc)) from None


def _output_path(args, config, base):
    out = args.out or config.get("output")
    if out is None:
        return None
    out = Path(out)
    if args.out is None and not out.is_absolute():
        out = base / out
    return out


def _fmt(x):
    return repr(float(x))


def _summary(result, model) -> str:
    params = ", ".join(f"{k}={np.round(v, 12).tolist()}" for k, v in model.params().items())
    lines = [
        f"model: {model.variant}" + (f" ({params})" if params else ""),
        f"shock: {_fmt(result.shock)}",
        f"{result.total_defaults} defaults ({result.direct_defaults} direct, "
        f"{result.indirect_defaults} indirect)",
        f"direct defaults: {result.direct_defaults}",
        f"indirect defaults: {result.indirect_defaults}",
        f"total defaults: {result.total_defaults}",
        f"defaulted: {', '.join(result.defaulted_ids) or '-'}",
        f"iterations: {result.iterations_used} "
        f"({'converged' if result.converged else 'NOT CONVERGED'})",
        f"final delta_r: {_fmt(result.final_delta_r)}",
        f"total final equity: {_fmt(result.total_final_equity)}",
    ]
    return "\n".join(lines)


def cmd_validate(args) -> int:
    try:
        net = dataio.load_network(args.path)
    except dataio.NetworkFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NetworkValidationError as exc:
        print(f"invalid network: {len(exc.violations)} violation(s)")
        for v in exc.violations:
            print(f"  - {v}")
        return EXIT_FAIL
    print(f"valid network: {net.n} institutions, {int(np.count_nonzero(net.internal_assets))} holdings")
    return EXIT_OK


def cmd_run(args) -> int:
    config, base = _load_config(args.config)
    overrides = {k: v for k, v in _parse_param_flags(args.param).items()}
    for k, v in overrides.items():
        if len(v) != 1:
            raise InputError(f"run takes a single value for {k}; use sweep for grids")
        overrides[k] = v[0]
    model = _build_model(config.get("model"), args.model, overrides)
    solver = _build_solver(config.get("solver"), args)
    shock = args.shock if args.shock is not None else config.get("shock", 0.0)
    shock = _number(shock, "shock")
    if not 0 <= shock <= 1:
        raise InputError(f"shock must lie in [0, 1], got {shock!r}")
    out = _output_path(args, config, base)
    network = _load_network(args, config, base)

    try:
        result = run_scenario(network, model, shock, solver)
    except ModelError as exc:
        raise InputError(str(exc)) from None
    print(_summary(result, model))
    if out is not None:
        dataio.save_results([result], out)
    return EXIT_OK if result.converged else EXIT_FAIL


def cmd_sweep(args) -> int:
    config, base = _load_config(args.config)
    block = dict(config.get("sweep") or {})
    grid_spec = args.shock_grid or block.get("shock_grid") or block.get("shocks")
    if grid_spec is None:
        raise InputError("no shock grid given (use --shock-grid or sweep.shock_grid)")
    shocks = _parse_grid(grid_spec)
    if any(not 0 <= a <= 1 for a in shocks):
        raise InputError("shock grid values must lie in [0, 1]")
    params = {_param_name(k): [float(x) for x in np.atleast_1d(v)]
              for k, v in (block.get("params") or {}).items()}
    params.update(_parse_param_flags(args.param))
    model = _build_model(config.get("model"), args.model, {})
    solver = _build_solver(config.get("solver"), args)
    out = _output_path(args, config, base)
    network = _load_network(args, config, base)
    try:
        spec = SweepSpec(network, model, shocks, params, solver)
        rows = sweep(spec, max_workers=args.workers)
    except (ModelError, ValueError) as exc:
        raise InputError(str(exc)) from None

    text = dataio.results_csv(rows)
    if out is None:
        sys.stdout.write(text)
    else:
        dataio.save_results(rows, out)
        print(f"wrote {len(rows)} rows to {out}")
    failed = sum(not r.result.converged for r in rows)
    if failed:
        print(f"warning: {failed} scenario(s) did not converge", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_generate(args) -> int:
    doc, _ = _load_config(args.spec)
    if args.seed is not None:
        doc["seed"] = args.seed
    try:
        spec = dataio.load_synthetic_spec(doc)
        network = dataio.generate_synthetic(spec)
    except (TypeError, ValueError) as exc:
        raise InputError(f"invalid synthetic spec: {exc}") from None
    out = Path(args.out or doc.get("output", "network"))
    dataio.save_network(network, out)
    print(f"wrote {network.n} institutions to {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nevarisk", description="Stress tests on financial networks with NEVA valuation."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a network file")
    p.add_argument("path", nargs="?", help="network directory, institutions CSV or JSON bundle")
    p.add_argument("--network", dest="network_flag")
    p.set_defaults(func=cmd_validate)

    def common(p):
        p.add_argument("config", nargs="?", help="YAML/JSON run configuration")
        p.add_argument("--network")
        p.add_argument("--model", help="model variant: " + ", ".join(TUNABLE))
        p.add_argument("--param", action="append", metavar="NAME=V1,V2,...")
        p.add_argument("--epsilon", type=float)
        p.add_argument("--max-iter", type=int)
        p.add_argument("--out")

    p = sub.add_parser("run", help="solve one shock scenario")
    common(p)
    p.add_argument("--shock", type=float)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="sweep shocks and parameters to CSV")
    common(p)
    p.add_argument("--shock-grid", metavar="START:STOP:STEP")
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("generate", help="write a synthetic network")
    p.add_argument("spec", nargs="?", help="YAML/JSON synthetic spec")
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_generate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command == "validate":
        args.path = args.path or args.network_flag
        if args.path is None:
            print("error: validate needs a network path", file=sys.stderr)
            return EXIT_INPUT
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
