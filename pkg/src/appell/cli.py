"""Command-line front end: ``appell gen|verify|symbol --config <path> [--out <dir>]``.

Exit codes: 0 success, 1 a verification check failed, 2 bad input (unreadable
or invalid config, degenerate measure, malformed operator file).
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .checks import kernel_deviation, run_suite
from .errors import AppellError, DegenerateMeasureError
from .measures import ProductMeasure
from .operators import (
    OperatorKernel,
    constants_operator,
    measure_change_operator,
    reconstruct_blackbox,
    symbol_series,
    zero_operator,
)
from .system import AppellSystem, build
from .tensor import HilbertScale, graded_indices, multi_indices

EXIT_OK, EXIT_FAILED, EXIT_INPUT = 0, 1, 2
BUILTIN_OPERATORS = ("measure_change", "zero", "constants")


class ConfigError(ValueError):
    pass


def format_float(v: float) -> str:
    if math.isnan(v) or math.isinf(v):
        raise ValueError(f"non-finite value {v} cannot be written")
    return format(v + 0.0, ".17g")


def dumps(obj, indent: int = 0) -> str:
    """JSON with a fixed key order and every float at 17 significant digits."""
    pad, inner = "  " * indent, "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {dumps(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple)) for v in obj):
            return "[" + ", ".join(dumps(v) for v in obj) + "]"
        return "[\n" + ",\n".join(inner + dumps(v, indent + 1) for v in obj) + "\n" + pad + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return dumps([obj.real, obj.imag])
    if isinstance(obj, str):
        return json.dumps(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _value(v):
    v = complex(v)
    return v.real if v.imag == 0 else [v.real, v.imag]


def _measure(spec, d: int) -> ProductMeasure:
    if isinstance(spec, dict):
        spec = [spec] * d
    if not isinstance(spec, list) or len(spec) != d:
        raise ConfigError(f"measure must be one spec or a list of {d} specs")
    return ProductMeasure.from_dicts(spec)


def load_config(path) -> dict:
    try:
        cfg = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    d, N = cfg.get("d"), cfg.get("N")
    if not isinstance(d, int) or d < 1:
        raise ConfigError("d must be an integer >= 1")
    if not isinstance(N, int) or N < 0:
        raise ConfigError("N must be a non-negative integer")
    if "measure" not in cfg:
        raise ConfigError("config needs a 'measure' entry")
    for name, tol in cfg.get("tolerances", {}).items():
        if not isinstance(tol, (int, float)) or not tol > 0:
            raise ConfigError(f"tolerance {name} must be positive")
    return cfg


def systems(cfg: dict) -> tuple[AppellSystem, AppellSystem]:
    d, N = cfg["d"], cfg["N"]
    scale = HilbertScale(tuple(cfg["weights"])) if "weights" in cfg else HilbertScale.default(d)
    if scale.d != d:
        raise ConfigError(f"weights has {scale.d} entries, d = {d}")
    sys_in = build(_measure(cfg["measure"], d), N, scale)
    sys_out = build(_measure(cfg["measure_out"], d), N, scale) if "measure_out" in cfg else sys_in
    return sys_in, sys_out


def _point(cfg: dict, key: str, default: float, d: int) -> np.ndarray:
    v = np.asarray(cfg.get(key, [default] * d), dtype=float)
    if v.shape != (d,):
        raise ConfigError(f"{key} must have {d} entries")
    return v


def system_json(sys: AppellSystem) -> dict:
    """P-kernel tables and the reciprocal Laplace series of a system."""
    recip = [{"alpha": list(a), "value": _value(v)}
             for a, v in zip(graded_indices(sys.d, sys.N), sys.recip.coeffs)]
    kernels = []
    for n in range(sys.N + 1):
        K, cols = sys.kernel(n), graded_indices(sys.d, n)
        rows = []
        for g, gamma in enumerate(multi_indices(sys.d, n)):
            terms = [{"alpha": list(cols[j]), "value": _value(K[g, j])} for j in np.nonzero(K[g])[0]]
            rows.append({"gamma": list(gamma), "terms": terms})
        kernels.append({"n": n, "rows": rows})
    return {"d": sys.d, "N": sys.N, "weights": list(sys.scale.weights),
            "measure": sys.measure.to_dicts(), "reciprocal": recip, "kernels": kernels}


def _out_dir(args, cfg) -> Path:
    out = Path(args.out or cfg.get("out", "."))
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_gen(args, cfg) -> int:
    sys_in, sys_out = systems(cfg)
    out = _out_dir(args, cfg)
    (out / "appell_system.json").write_text(dumps(system_json(sys_in)) + "\n")
    if sys_out is not sys_in:
        (out / "appell_system_out.json").write_text(dumps(system_json(sys_out)) + "\n")
    return EXIT_OK


def _threads() -> int | None:
    raw = os.environ.get("APPELL_THREADS")
    if not raw:
        return None
    try:
        n = int(raw)
    except ValueError as exc:
        raise ConfigError(f"APPELL_THREADS must be an integer, got {raw!r}") from exc
    if n < 1:
        raise ConfigError("APPELL_THREADS must be >= 1")
    return n


def cmd_verify(args, cfg) -> int:
    sys_in, sys_out = systems(cfg)
    d = cfg["d"]
    views = [tuple(v) for v in cfg.get("views", [[0, 0], [1, 1]])]
    kwargs = dict(views=views, xi=_point(cfg, "xi", 0.5, d), eta=_point(cfg, "eta", 0.3, d),
                  tolerances=cfg.get("tolerances"), seed=int(cfg.get("seed", 0)))
    threads = _threads()
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = run_suite(sys_in, sys_out, executor=pool, **kwargs)
    else:
        results = run_suite(sys_in, sys_out, **kwargs)
    report = {"d": d, "N": cfg["N"], "all_pass": all(r.passed for r in results),
              "checks": [r.to_dict() for r in results]}
    (_out_dir(args, cfg) / "verify_report.json").write_text(dumps(report) + "\n")
    for r in results:
        dev = "-" if r.max_deviation is None else f"{r.max_deviation:.3e}"
        print(f"{'PASS' if r.passed else 'FAIL'} {r.check} deviation={dev} tol={r.tolerance:.1e} {r.status}")
    return EXIT_OK if report["all_pass"] else EXIT_FAILED


def _operator(spec: dict, sys_in: AppellSystem, sys_out: AppellSystem, base: Path) -> OperatorKernel:
    if "operator_file" in spec:
        path = Path(spec["operator_file"])
        path = path if path.is_absolute() else base / path
        try:
            data = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read operator file {path}: {exc}") from exc
        try:
            return OperatorKernel.from_json(data, sys_in, sys_out)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"malformed operator file {path}: {exc}") from exc
    name = spec.get("operator", "measure_change")
    if name == "measure_change":
        return measure_change_operator(sys_in, sys_out)
    if name == "zero":
        return zero_operator(sys_in, sys_out)
    if name == "constants":
        return constants_operator(sys_in, sys_out, spec.get("value", 1.0))
    raise ConfigError(f"unknown operator {name!r}; builtins are {', '.join(BUILTIN_OPERATORS)}")


def cmd_symbol(args, cfg) -> int:
    sys_in, sys_out = systems(cfg)
    d = cfg["d"]
    spec = cfg.get("symbol", {})
    B = _operator(spec, sys_in, sys_out, Path(args.config).resolve().parent)
    xs = np.asarray(spec.get("xi_grid", np.linspace(-1.0, 1.0, 11)), dtype=float)
    es = np.asarray(spec.get("eta_grid", np.linspace(-1.0, 1.0, 11)), dtype=float)
    u = _point(spec, "xi_direction", 1.0, d)
    v = _point(spec, "eta_direction", 1.0, d)
    germ = symbol_series(B)
    XI = np.array([s * u for s in xs for _ in es]).reshape(-1, d)
    ETA = np.array([t * v for _ in xs for t in es]).reshape(-1, d)
    values = germ.evaluate_many(XI, ETA)
    lines = ["xi,eta,re,im"]
    k = 0
    for s in xs:
        for t in es:
            lines.append(",".join(format_float(float(x)) for x in (s, t, values[k].real, values[k].imag)))
            k += 1
    out = _out_dir(args, cfg)
    (out / "symbol_grid.csv").write_text("\n".join(lines) + "\n")
    if spec.get("reconstruct", False):
        M = int(spec.get("M", min(cfg["N"], 4)))
        target = OperatorKernel(sys_in, sys_out, {k: f for k, f in B.blocks.items()
                                                  if k[0] <= M and k[1] <= M})
        rec = reconstruct_blackbox(germ.evaluate_many, sys_in, sys_out, M=M,
                                   radii=spec.get("radii"), delta=spec.get("delta", 0.5),
                                   eps=spec.get("eps", 1.0), vectorized=True)
        dev = kernel_deviation(target, rec) if target.blocks else max(
            [float(np.max(np.abs(f.coeffs))) for f in rec.blocks.values()] + [0.0])
        tol = cfg.get("tolerances", {}).get("roundtrip_blackbox", 1e-6)
        (out / "reconstructed_kernel.json").write_text(dumps(rec.to_json()) + "\n")
        (out / "roundtrip.json").write_text(dumps(
            {"M": M, "roundtrip_deviation": dev, "tolerance": tol, "pass": dev <= tol}) + "\n")
    return EXIT_OK


COMMANDS = {"gen": cmd_gen, "verify": cmd_verify, "symbol": cmd_symbol}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="appell", description="Biorthogonal Appell calculus toolkit")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True, help="path to a JSON experiment config")
    parser.add_argument("--out", default=None, help="output directory (default: config 'out' or .)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        return COMMANDS[args.command](args, cfg)
    except DegenerateMeasureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ConfigError, AppellError, KeyError, TypeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
