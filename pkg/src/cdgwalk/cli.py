"""Command-line front end: ``cdgwalk <command> [flags]``.

Every command writes a single CSV or JSON result, to ``--out`` or to
stdout. When ``--out`` is given, ``<out>.manifest.json`` records the
command, its parameters, the library version, the seed, the wall-clock
duration and the SHA-256 digest of the output.
"""

from __future__ import annotations

import argparse
import hashlib
import io
import json
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor

from . import __version__
from ._backend import BACKEND
from .exact import (
    b0_equivalence_triple,
    case1_upper_bound,
    mixing_time,
    tv_curve,
)
from .model import CDGError, ModulusSpec, StepDistribution, validate_step
from .montecarlo import (
    SamplerConfig,
    chebyshev_event_allowance,
    empirical_event_bound,
    empirical_f_moment,
)
from .spectral import (
    Case1DegenerateError,
    chebyshev_certificate,
    claim_ratio,
    default_lambda,
    fact_checks,
    hat_p_n,
    pi1_beta_trend,
    pi_product,
    r_schedule,
    spectral_summary,
)

SCHEMAS = """\
output schemas:
  evolve       CSV columns: n,tv
               JSON: {p, t, step:{a,b,c}, rows:[{n, tv}]}
  certificate  JSON: {t, r, lambda, step, pi1_abs, e_f:{re,im}, e_ff, var,
               alpha, beta_cheb, margin, bound, valid}
  sweep        beta-mixing:  beta,t,p,n_star,tv_at_n_star,resolved
               pi1-vs-beta:  beta,t,pi1_abs
               claim-ratio:  t,r,pi1_abs,claim_ratio
               facts:        t,max_ratio,fact1_holds,c0,j_lo,j_hi
  mc           JSON: {p, t, n, r, samples, seed, step, mean:{re,im},
               stderr:{re,im}, target:{re,im}, z:{re,im}, event}
  equivalence  JSON: {p, a, n, tv_x, tv_y, tv_z, max_diff}
numbers are written with 17 significant digits; non-finite values as null.
"""


class UsageError(CDGError):
    code = "usage"


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return "%.17g" % x
    if x is None:
        return ""
    return str(x)


def _jsonable(x):
    if isinstance(x, bool) or x is None or isinstance(x, (int, str)):
        return x
    if isinstance(x, float):
        if not math.isfinite(x):
            return None
        return float("%.17g" % x)
    if isinstance(x, complex):
        return {"re": _jsonable(x.real), "im": _jsonable(x.imag)}
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if hasattr(x, "item"):
        return _jsonable(x.item())
    raise TypeError(f"cannot serialize {type(x).__name__}")


def dumps_json(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, allow_nan=False) + "\n"


def dumps_csv(columns, rows) -> str:
    buf = io.StringIO()
    buf.write(",".join(columns) + "\n")
    for row in rows:
        buf.write(",".join(_fmt(row[c]) for c in columns) + "\n")
    return buf.getvalue()


# --- flag parsing helpers --------------------------------------------------

def _modulus(args) -> ModulusSpec:
    if getattr(args, "t", None) is not None and getattr(args, "p", None) is not None:
        raise UsageError("give only one of --p and --t")
    if getattr(args, "t", None) is not None:
        return ModulusSpec.mersenne(args.t)
    if getattr(args, "p", None) is not None:
        return ModulusSpec.of(args.p)
    raise UsageError("one of --p or --t is required")


def _step(args) -> StepDistribution:
    if args.abc is not None and args.beta is not None:
        raise UsageError("give only one of --abc and --beta")
    if args.abc is not None:
        parts = args.abc.split(",")
        if len(parts) != 3:
            raise UsageError("--abc expects three comma-separated probabilities")
        return validate_step(*(float(v) for v in parts))
    if args.beta is not None:
        return StepDistribution.symmetric(args.beta)
    raise UsageError("one of --abc or --beta is required")


def _floats(text):
    return [float(v) for v in text.split(",") if v.strip()]


def _ints(text):
    return [int(v) for v in text.split(",") if v.strip()]


def _lambda(text, t):
    if text == "auto":
        return default_lambda(t)
    return float(text)


def _r_from(args, step, t):
    if (args.r is None) == (args.lambda_ is None):
        raise UsageError("give exactly one of --r and --lambda")
    if args.r is not None:
        if args.r < 1:
            raise UsageError("--r must be >= 1")
        return args.r, None
    lam = _lambda(args.lambda_, t)
    return r_schedule(step, t, lam), lam


def _step_dict(step):
    return {"a": step.a, "b": step.b, "c": step.c}


def _pmap(fn, items, jobs):
    if jobs <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


# --- commands ----------------------------------------------------------------

def cmd_evolve(args):
    m = _modulus(args)
    step = _step(args)
    if args.n_max < 0:
        raise UsageError("--n-max must be >= 0")
    curve = tv_curve(step, m, args.n_max, args.stride, budget=args.budget)
    rows = [{"n": n, "tv": tv} for n, tv in curve.points]
    if args.format == "json":
        return dumps_json({"p": m.p, "t": m.mersenne_t, "step": _step_dict(step), "rows": rows})
    return dumps_csv(["n", "tv"], rows)


def _certificate_record(step, t, r, lam):
    cert = chebyshev_certificate(step, t, r)
    s = spectral_summary(step, t, r)
    return {
        "t": t, "r": r, "lambda": lam, "step": _step_dict(step),
        "pi1_abs": s.pi1_abs, "e_f": s.e_f, "e_ff": s.e_ff, "var": s.var,
        "alpha": cert.alpha, "beta_cheb": cert.beta_cheb, "margin": cert.margin,
        "bound": cert.bound, "valid": cert.valid,
    }


def cmd_certificate(args):
    if args.t is None:
        raise UsageError("--t is required")
    step = _step(args)
    if step.is_case1():
        raise Case1DegenerateError(f"step {step.probs} is Case 1")
    r, lam = _r_from(args, step, args.t)
    return dumps_json(_certificate_record(step, args.t, r, lam))


def _sweep_steps(args):
    if args.betas is not None:
        return [StepDistribution.symmetric(b) for b in _floats(args.betas)]
    return [_step(args)]


def cmd_sweep(args):
    ts = _ints(args.t) if args.t else []
    jobs = args.jobs
    if args.study == "beta-mixing":
        if args.p is not None:
            mods = [ModulusSpec.of(p) for p in _ints(args.p)]
        elif ts:
            mods = [ModulusSpec.mersenne(t) for t in ts]
        else:
            raise UsageError("beta-mixing needs --t or --p")
        grid = [(m, s) for m in mods for s in _sweep_steps(args)]

        def run(ms):
            m, s = ms
            rep = mixing_time(s, m, args.eps, budget=args.budget)
            return {"beta": s.a, "t": m.mersenne_t, "p": m.p, "n_star": rep.n_star,
                    "tv_at_n_star": rep.tv_at_n_star, "resolved": rep.resolved}

        cols = ["beta", "t", "p", "n_star", "tv_at_n_star", "resolved"]
        rows = _pmap(run, grid, jobs)
    elif args.study == "pi1-vs-beta":
        if not ts or args.betas is None:
            raise UsageError("pi1-vs-beta needs --t and --betas")
        grid = [(t, b) for t in ts for b in _floats(args.betas)]
        rows = _pmap(lambda tb: {"beta": tb[1], "t": tb[0],
                                 "pi1_abs": pi1_beta_trend([tb[1]], tb[0])[0][1]}, grid, jobs)
        cols = ["beta", "t", "pi1_abs"]
    elif args.study == "claim-ratio":
        if not ts:
            raise UsageError("claim-ratio needs --t")
        step = _step(args)

        def run(t):
            if args.r is not None:
                r = args.r
            else:
                r = r_schedule(step, t, _lambda(args.lambda_ or "auto", t))
            return {"t": t, "r": r, "pi1_abs": abs(pi_product(step, t, 1)),
                    "claim_ratio": claim_ratio(step, t, r)}

        rows = _pmap(run, ts, jobs)
        cols = ["t", "r", "pi1_abs", "claim_ratio"]
    elif args.study == "facts":
        if not ts:
            raise UsageError("facts needs --t")
        step = _step(args)

        def run(t):
            rep = fact_checks(step, t)
            return {"t": t, "max_ratio": rep.max_ratio, "fact1_holds": rep.fact1_holds,
                    "c0": rep.c0, "j_lo": rep.fact2_range[0], "j_hi": rep.fact2_range[1]}

        rows = _pmap(run, ts, jobs)
        cols = ["t", "max_ratio", "fact1_holds", "c0", "j_lo", "j_hi"]
    else:
        raise UsageError(f"unknown study {args.study!r}")
    if args.format == "json":
        return dumps_json({"study": args.study, "rows": rows})
    return dumps_csv(cols, rows)


def cmd_mc(args):
    m = _modulus(args)
    t = m.mersenne_t
    if t is None:
        raise UsageError("mc needs a Mersenne modulus (--t, or --p = 2^t - 1)")
    if args.samples < 1:
        raise UsageError("--samples must be >= 1")
    step = _step(args)
    given = [x is not None for x in (args.n, args.r, args.lambda_)]
    if sum(given) != 1:
        raise UsageError("give exactly one of --n, --r and --lambda")
    if args.n is not None:
        n = args.n
        r = n // t if n % t == 0 and n > 0 else None
    else:
        r, _ = _r_from(args, step, t)
        n = r * t
    cfg = SamplerConfig(seed=args.seed, samples=args.samples, modulus=m, step=step, n=n)
    mom = empirical_f_moment(cfg, jobs=args.jobs)
    target = sum(hat_p_n(step, m, n, 1 << j) for j in range(t))
    z = complex(
        (mom.mean.real - target.real) / mom.stderr_re if mom.stderr_re > 0 else 0.0,
        (mom.mean.imag - target.imag) / mom.stderr_im if mom.stderr_im > 0 else 0.0,
    )
    event = None
    if r is not None and not step.is_case1():
        cert = chebyshev_certificate(step, t, r)
        freq = empirical_event_bound(cfg, cert, jobs=args.jobs)
        allowance = chebyshev_event_allowance(cert, cfg.samples)
        event = {"beta_cheb": cert.beta_cheb, "cert_valid": cert.valid,
                 "frequency": freq, "allowance": allowance, "within": freq <= allowance}
    return dumps_json({
        "p": m.p, "t": t, "n": n, "r": r, "samples": cfg.samples, "seed": cfg.seed,
        "step": _step_dict(step), "mean": mom.mean,
        "stderr": {"re": mom.stderr_re, "im": mom.stderr_im},
        "target": target, "z": z, "event": event,
    })


def cmd_equivalence(args):
    if args.p is None:
        raise UsageError("--p is required")
    m = ModulusSpec.of(args.p)
    if args.n < 0:
        raise UsageError("--n must be >= 0")
    x, y, z = b0_equivalence_triple(args.a, m, args.n, budget=args.budget)
    diff = max(abs(x - y), abs(y - z), abs(x - z))
    return dumps_json({"p": m.p, "a": args.a, "n": args.n,
                       "tv_x": x, "tv_y": y, "tv_z": z, "max_diff": diff})


# --- parser ----------------------------------------------------------------

def _add_step_flags(sp):
    sp.add_argument("--abc", help="step law a,b,c for steps +1,0,-1")
    sp.add_argument("--beta", type=float, help="symmetric law (beta, 1-2beta, beta)")


def _add_common(sp, formats=("json",)):
    sp.add_argument("--out", help="output file (default: stdout)")
    sp.add_argument("--format", choices=formats, default=formats[0])
    sp.add_argument("--budget", type=int, default=None,
                    help="override the exact-evolution budget on p*n (default 2^34 or $CDG_BUDGET)")
    sp.add_argument("--jobs", type=int, default=1, help="worker threads (results do not depend on it)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cdgwalk",
        description="Experiments on the random process X -> 2X + b (mod p), b in {-1,0,1}.",
        epilog=SCHEMAS,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"cdgwalk {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("evolve", help="exact TV-to-uniform curve",
                        epilog=SCHEMAS, formatter_class=argparse.RawDescriptionHelpFormatter)
    sp.add_argument("--p", type=int)
    sp.add_argument("--t", type=int)
    _add_step_flags(sp)
    sp.add_argument("--n-max", type=int, required=True)
    sp.add_argument("--stride", type=int, default=1)
    _add_common(sp, ("csv", "json"))
    sp.set_defaults(func=cmd_evolve)

    sp = sub.add_parser("certificate", help="Chebyshev lower-bound certificate",
                        epilog=SCHEMAS, formatter_class=argparse.RawDescriptionHelpFormatter)
    sp.add_argument("--t", type=int)
    _add_step_flags(sp)
    sp.add_argument("--r", type=int)
    sp.add_argument("--lambda", dest="lambda_", help="real value or 'auto' (= ln ln t)")
    _add_common(sp)
    sp.set_defaults(func=cmd_certificate)

    sp = sub.add_parser("sweep", help="grid studies",
                        epilog=SCHEMAS, formatter_class=argparse.RawDescriptionHelpFormatter)
    sp.add_argument("--study", required=True,
                    help="beta-mixing | pi1-vs-beta | claim-ratio | facts")
    sp.add_argument("--t", help="comma-separated Mersenne exponents")
    sp.add_argument("--p", help="comma-separated odd moduli (beta-mixing only)")
    sp.add_argument("--betas", help="comma-separated symmetric biases")
    _add_step_flags(sp)
    sp.add_argument("--eps", type=float, default=0.25)
    sp.add_argument("--r", type=int)
    sp.add_argument("--lambda", dest="lambda_")
    _add_common(sp, ("csv", "json"))
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("mc", help="Monte Carlo estimate of E f and Chebyshev event",
                        epilog=SCHEMAS, formatter_class=argparse.RawDescriptionHelpFormatter)
    sp.add_argument("--p", type=int)
    sp.add_argument("--t", type=int)
    _add_step_flags(sp)
    sp.add_argument("--n", type=int)
    sp.add_argument("--r", type=int)
    sp.add_argument("--lambda", dest="lambda_")
    sp.add_argument("--samples", type=int, required=True)
    sp.add_argument("--seed", type=int, default=0)
    _add_common(sp)
    sp.set_defaults(func=cmd_mc)

    sp = sub.add_parser("equivalence", help="b = 0 three-process check",
                        epilog=SCHEMAS, formatter_class=argparse.RawDescriptionHelpFormatter)
    sp.add_argument("--p", type=int)
    sp.add_argument("--a", type=float, required=True)
    sp.add_argument("--n", type=int, required=True)
    _add_common(sp)
    sp.set_defaults(func=cmd_equivalence)
    return parser


def _error_code(exc) -> str:
    code = getattr(exc, "code", None)
    if code:
        return code
    name = type(exc).__name__
    if name == "BudgetExceededError":
        return "budget-exceeded"
    return "invalid-input"


def write_manifest(path, args, text, duration):
    params = {k: v for k, v in vars(args).items() if k not in ("func", "out")}
    manifest = {
        "command": args.command,
        "parameters": params,
        "version": __version__,
        "backend": BACKEND,
        "seed": getattr(args, "seed", None),
        "duration_s": duration,
        "outputs": [{"path": path, "sha256": hashlib.sha256(text.encode("utf-8")).hexdigest()}],
    }
    with open(path + ".manifest.json", "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    t0 = time.perf_counter()
    try:
        text = args.func(args)
    except (CDGError, ArithmeticError) as exc:
        if args.format == "json":
            sys.stderr.write(json.dumps({"error": _error_code(exc), "message": str(exc)}) + "\n")
        else:
            sys.stderr.write(f"error: {exc}\n")
        return 1
    duration = time.perf_counter() - t0
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        write_manifest(args.out, args, text, duration)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
