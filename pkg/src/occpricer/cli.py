"""Command-line front end.

    occpricer {validate,roots,transform,price,mc,invert-test} --config run.toml [--output out.csv]

Exit codes: 0 success, 1 validation/config error, 2 numerical failure.  Each
failure writes exactly one JSON line to stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
from dataclasses import fields

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .errors import NumericalError, OccPricerError, ValidationError
from .inversion import InversionConfig, invert_carson, invert_double
from .model import MEJDParams, levy_exponent, risk_neutral, validate
from .roots import find_roots

SCHEMA = 1

MODEL_KEYS = {"mu", "sigma", "lambda", "p_up", "q_down", "up_weights", "up_rates", "down_weights",
              "down_rates", "risk_neutral"}
INSTRUMENT_KEYS = {"type", "S0", "K", "L", "U", "rho", "rho_lo", "rho_hi", "frac", "lam_q", "r", "T"}
NUMERICS_KEYS = {f.name for f in fields(InversionConfig)} | {"n_paths", "n_steps", "seed", "antithetic",
                                                            "mc_reference"}
TRANSFORM_KEYS = {"kind", "alpha", "rho", "rho1", "rho2", "gamma", "h", "H", "x_min", "x_max"}
SECTIONS = {"model": MODEL_KEYS, "instrument": INSTRUMENT_KEYS, "numerics": NUMERICS_KEYS,
            "transform": TRANSFORM_KEYS}


class ConfigError(ValidationError):
    pass


def load_config(path: str) -> dict:
    try:
        with open(path, "rb") as fh:
            cfg = tomllib.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config does not parse: {exc}") from exc
    if cfg.get("schema") != SCHEMA:
        raise ConfigError(f"unsupported or missing schema (expected schema = {SCHEMA})")
    for key, val in cfg.items():
        if key == "schema":
            continue
        if key not in SECTIONS:
            raise ConfigError(f"unknown section [{key}]")
        unknown = set(val) - SECTIONS[key]
        if unknown:
            raise ConfigError(f"unknown keys in [{key}]: {', '.join(sorted(unknown))}")
    return cfg


def build_model(cfg: dict, r: float | None = None) -> MEJDParams:
    m = cfg.get("model")
    if m is None:
        raise ConfigError("missing [model] section")
    try:
        params = MEJDParams(
            mu=m.get("mu", 0.0), sigma=m["sigma"], lam=m.get("lambda", 0.0),
            p_up=m.get("p_up", 0.0), q_down=m.get("q_down", 0.0),
            up_weights=m.get("up_weights", ()), up_rates=m.get("up_rates", ()),
            down_weights=m.get("down_weights", ()), down_rates=m.get("down_rates", ()),
        )
    except KeyError as exc:
        raise ConfigError(f"missing model key {exc}") from exc
    if m.get("risk_neutral", False) and r is not None:
        params = risk_neutral(params, r)
    return params


def inversion_config(cfg: dict) -> InversionConfig:
    num = cfg.get("numerics", {})
    return InversionConfig(**{k: v for k, v in num.items() if k in {f.name for f in fields(InversionConfig)}})


def path_config(cfg: dict, seed: int | None):
    from .montecarlo import PathConfig
    num = cfg.get("numerics", {})
    return PathConfig(n_paths=int(num.get("n_paths", 100_000)), n_steps=int(num.get("n_steps", 500)),
                      seed=int(num.get("seed", 0) if seed is None else seed),
                      antithetic=bool(num.get("antithetic", False)))


def build_spec(cfg: dict):
    from .pricing import DoubleStepCall, QuantileCall, StepCall
    ins = cfg.get("instrument")
    if ins is None:
        raise ConfigError("missing [instrument] section")
    kind = ins.get("type")
    r = float(ins.get("r", 0.0))
    model = build_model(cfg, r)
    try:
        if kind == "step":
            return StepCall(model, ins["S0"], ins["K"], ins["L"], ins.get("rho", 0.0), r, ins["T"])
        if kind == "double-step":
            return DoubleStepCall(model, ins["S0"], ins["K"], ins["L"], ins["U"], ins.get("rho_lo", 0.0),
                                  ins.get("rho_hi", 0.0), r, ins["T"])
        if kind == "quantile":
            return QuantileCall(model, ins["S0"], ins["K"], ins["frac"], ins.get("lam_q", 1.0), r, ins["T"])
    except KeyError as exc:
        raise ConfigError(f"missing instrument key {exc}") from exc
    raise ConfigError(f"unknown instrument type {kind!r}")


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(header, rows, output: str | None):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    text = buf.getvalue()
    if output is None or output == "-":
        sys.stdout.write(text)
        return
    d = os.path.dirname(os.path.abspath(output))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".occpricer-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, output)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# -- commands -----------------------------------------------------------------------------

def cmd_validate(cfg, args):
    ins = cfg.get("instrument", {})
    params = build_model(cfg, ins.get("r"))
    rep = validate(params, risk_neutral=bool(cfg["model"].get("risk_neutral", False)))
    rows = [("ok", "")] if rep.ok else [("violation", v) for v in rep.violations]
    write_csv(["status", "message"], rows, args.output)
    if not rep.ok:
        raise ValidationError("; ".join(rep.violations))


def cmd_roots(cfg, args):
    alpha = args.alpha if args.alpha is not None else cfg.get("transform", {}).get("alpha")
    if alpha is None:
        raise ConfigError("roots needs --alpha or [transform] alpha")
    params = build_model(cfg, cfg.get("instrument", {}).get("r"))
    rs = find_roots(params, complex(alpha))
    rows = []
    for kind, vals in (("beta", rs.betas), ("gamma", rs.gammas)):
        for i, z in enumerate(vals, 1):
            res = abs(complex(levy_exponent(params, z)) - complex(alpha))
            rows.append((kind, i, float(z.real), float(z.imag), res, rs.interlaced))
    write_csv(["kind", "index", "re", "im", "residual", "interlaced"], rows, args.output)


def cmd_transform(cfg, args):
    from .occupation import (interval_occupation_transform, single_barrier_occupation_transform,
                             two_barrier_occupation_transform)
    t = cfg.get("transform")
    if t is None:
        raise ConfigError("missing [transform] section")
    params = build_model(cfg, cfg.get("instrument", {}).get("r"))
    alpha = args.alpha if args.alpha is not None else t.get("alpha")
    if alpha is None:
        raise ConfigError("transform needs alpha")
    kind = t.get("kind", "interval")
    gamma = t.get("gamma", 0.0)
    try:
        if kind == "interval":
            w = interval_occupation_transform(params, alpha, t["rho"], gamma, t["h"], t["H"])
        elif kind == "two-barrier":
            w = two_barrier_occupation_transform(params, alpha, t["rho1"], t["rho2"], gamma, t["h"], t["H"])
        elif kind == "single":
            w = single_barrier_occupation_transform(params, alpha, t["rho1"], t.get("rho2", 0.0), gamma, t["h"])
        else:
            raise ConfigError(f"unknown transform kind {kind!r}")
    except KeyError as exc:
        raise ConfigError(f"missing transform key {exc}") from exc
    xs = np.linspace(t.get("x_min", -1.0), t.get("x_max", 1.0), args.grid or 21)
    vals = w(xs)
    write_csv(["x", "re_w", "im_w"], [(float(x), float(v.real), float(v.imag)) for x, v in zip(xs, vals)],
              args.output)


def cmd_price(cfg, args):
    from .montecarlo import mc_price
    from .pricing import price
    spec = build_spec(cfg)
    p = price(spec, inversion_config(cfg))
    header = ["instrument", "S0", "K", "T", "r", "price", "mc_mean", "mc_stderr", "abs_diff", "rel_diff"]
    row = [spec.kind, spec.S0, spec.K, spec.T, spec.r, p, "", "", "", ""]
    if cfg.get("numerics", {}).get("mc_reference", False):
        est = mc_price(spec, path_config(cfg, args.seed))
        row[6:] = [est.mean, est.stderr, abs(p - est.mean), abs(p - est.mean) / abs(est.mean)]
    write_csv(header, [row], args.output)


def cmd_mc(cfg, args):
    from .montecarlo import mc_price
    spec = build_spec(cfg)
    pc = path_config(cfg, args.seed)
    if args.grid:
        pc = type(pc)(pc.n_paths, args.grid, pc.seed, pc.antithetic)
    est = mc_price(spec, pc)
    write_csv(["instrument", "estimate", "stderr", "n", "n_steps", "seed"],
              [(spec.kind, est.mean, est.stderr, est.n, pc.n_steps, pc.seed)], args.output)


def invert_test_rows(icfg: InversionConfig):
    rows = []
    for T in (0.1, 0.5, 1.0, 2.0):
        rows.append(("exponential", T, "", np.exp(0.3 * T), invert_carson(lambda a: a / (a - 0.3), T, icfg, growth=0.3)))
        rows.append(("ramp", T, "", T, invert_carson(lambda a: 1.0 / a, T, icfg)))
    rows.append(("separable-2d", 0.5, 0.3, np.exp(0.5 - 0.6),
                 invert_double(lambda a, b: 1.0 / ((a - 1.0) * (b + 2.0)), 0.5, 0.3, icfg, growth=1.0)))
    rows.append(("product-2d", 1.0, 1.0, 1.0, invert_double(lambda a, b: 1.0 / (a * a * b * b), 1.0, 1.0, icfg)))
    return [(n, T, k, e, c, abs(c - e), abs(c - e) / abs(e)) for n, T, k, e, c in rows]


def cmd_invert_test(cfg, args):
    rows = invert_test_rows(inversion_config(cfg))
    write_csv(["pair", "T", "k", "expected", "computed", "abs_err", "rel_err"], rows, args.output)
    worst = max(r[-1] for r in rows)
    if worst > 1e-6:
        from .errors import NonConvergence
        raise NonConvergence(f"closed-form pair recovered with relative error {worst:.3e}")


COMMANDS = {"validate": cmd_validate, "roots": cmd_roots, "transform": cmd_transform,
            "price": cmd_price, "mc": cmd_mc, "invert-test": cmd_invert_test}


def parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="occpricer", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", required=True, help="TOML run configuration (schema = 1)")
    p.add_argument("--output", default=None, help="CSV destination (default: stdout)")
    p.add_argument("--alpha", type=complex, default=None, help="transform argument for roots/transform")
    p.add_argument("--grid", type=int, default=None, help="x-grid size (transform) or steps per unit time (mc)")
    p.add_argument("--seed", type=int, default=None, help="override the Monte Carlo seed")
    return p


def _fail(code: int, exc: BaseException, command: str | None) -> int:
    line = {"exit": code, "error": type(exc).__name__, "command": command, "message": str(exc)}
    sys.stderr.write(json.dumps(line) + "\n")
    return code


def run(argv=None) -> int:
    args = parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        COMMANDS[args.command](cfg, args)
    except NumericalError as exc:
        return _fail(2, exc, args.command)
    except (ValidationError, ValueError, TypeError) as exc:
        return _fail(1, exc, args.command)
    except OccPricerError as exc:
        return _fail(2, exc, args.command)
    return 0


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
