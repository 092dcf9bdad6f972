"""Command-line front end.

Every subcommand reads its parameters from flags and/or a JSON problem file,
writes a CSV table (or a JSON report) to stdout or ``--out``, and a run
manifest next to ``--out`` (or to ``--manifest``). Exit codes: 0 success,
2 validation error, 3 numeric failure, 4 failed property check.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import platform
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__, errors
from .algebra import alpha_from_rational_vector, parse_poly, parse_rational
from .filter import sublevel_measure, to_trig_poly
from .mahler import bohr_mean_log_modulus, mahler_filter, mahler_jensen, mahler_torus_mean
from .orbit import cycle_mean_log, torus_orbit
from .problem import context_from_spec, filter_from_spec, load_problem, validate_problem
from .quasilattice import (
    AdmissibleVector,
    diffraction_sample,
    enumerate_window,
    multiscale_check,
)
from .refinable import RefinableEvaluator, eval_fhat, estimate_rho, scaling_sequence

COMMANDS = ("context", "mahler", "filter-mean", "sublevel", "fhat", "rho", "scaling", "orbit", "lattice",
            "multiscale", "diffraction")


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return "%.17g" % float(x)
    return str(x)


class Table:
    def __init__(self, header):
        self.header = list(header)
        self.rows = []

    def add(self, *row):
        self.rows.append([fmt(x) for x in row])

    def render(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header)
        w.writerows(self.rows)
        return buf.getvalue()


def _json_default(o):
    if isinstance(o, (np.floating, float)):
        return float(fmt(o))
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, (Fraction,)):
        return str(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, complex):
        return [o.real, o.imag]
    raise TypeError(f"not serializable: {type(o)}")


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n"


# ---------------------------------------------------------------------------
# parameter helpers


def _rationals(text):
    if isinstance(text, str):
        text = [t for t in text.split(",") if t.strip()]
    return [parse_rational(t) for t in text]


def _floats(x):
    if isinstance(x, str):
        return [float(t) for t in x.split(",") if t.strip()]
    if isinstance(x, (int, float)):
        return [float(x)]
    return [float(t) for t in x]


def _grid(task, default):
    if "y" in task:
        return np.asarray(_floats(task["y"]))
    if "y_min" in task or "y_max" in task:
        return np.linspace(float(task.get("y_min", default[0])), float(task.get("y_max", default[1])),
                           int(task.get("n", default[2])))
    return np.linspace(*default[:2], int(default[2]))


class Run:
    """Resolved inputs of one invocation."""

    def __init__(self, args, problem):
        self.args = args
        self.problem = problem
        self.task = dict(problem.get("task", {}))
        self.seed = args.seed if args.seed is not None else problem.get("seed", 0)
        self._ctx = None
        self._filter = None

    @property
    def ctx(self):
        if self._ctx is None:
            spec = self.args.minpoly or self.problem.get("context")
            if spec is None and isinstance(self.problem.get("filter"), dict):
                lam = self.problem["filter"]["lambda"]
                if isinstance(lam, dict):
                    spec = lam["minpoly"]
            if spec is None:
                raise errors.ValidationError("an algebraic context is required (--minpoly or 'context')")
            self._ctx = context_from_spec(spec)
        return self._ctx

    @property
    def filter(self):
        if self._filter is None:
            spec = self.args.filter or self.problem.get("filter")
            if spec is None:
                raise errors.ValidationError("a filter is required (--filter or 'filter')")
            needs_ctx = spec == "bernoulli"
            f, ctx = filter_from_spec(spec, self.ctx if needs_ctx else self._try_ctx())
            self._filter = f
            if ctx is not None and self._ctx is None:
                self._ctx = ctx
        return self._filter

    def _try_ctx(self):
        try:
            return self.ctx
        except errors.ValidationError:
            return None

    def tail_eps(self):
        if self.args.tolerance is not None:
            return self.args.tolerance
        return float(self.task.get("tail_eps", 1e-12))

    def q(self):
        q = self.args.q if self.args.q is not None else self.task.get("q")
        if q is None:
            raise errors.ValidationError("a rational vector q is required (--q or task.q)")
        return _rationals(q)


# ---------------------------------------------------------------------------
# subcommands; each returns (text, is_json)


def cmd_context(run):
    return _dump_json(run.ctx.describe()), True


def cmd_mahler(run):
    poly = run.args.poly if run.args.poly is not None else run.task.get("poly")
    t = Table(["quantity", "value", "half_width", "samples", "method"])
    if poly is not None:
        coeffs = parse_poly(poly) if isinstance(poly, str) else [int(c) for c in poly]
        est = mahler_jensen(coeffs)
        t.add("M(P)", est.value, est.half_width, est.samples, est.method)
    else:
        est = mahler_filter(run.filter, n_samples=int(run.task.get("samples", 1 << 18)), seed=run.seed)
        t.add("M(A)", est.value, est.half_width, est.samples, est.method)
    return t.render(), False


def cmd_filter_mean(run):
    f = run.filter
    L = _floats(run.task.get("L", [1e3, 1e4, 1e5]))
    clip = float(run.task.get("clip", 1e-8))
    line = bohr_mean_log_modulus(f, L, clip=clip, panels_per_unit=int(run.task.get("panels_per_unit", 64)),
                                 threads=run.args.threads)
    t = Table(["quantity", "L", "value", "half_width", "unclipped", "samples", "method"])
    for Lk, m in line.history:
        t.add("line_mean_log", Lk, m, line.half_width if Lk == line.history[-1][0] else "", "", line.samples,
              line.method)
    P = to_trig_poly(f)
    torus = mahler_torus_mean(P, n_samples=int(run.task.get("samples", 1 << 18)), clip=clip, seed=run.seed)
    t.add("torus_mean_log", "", math.log(torus.value), torus.half_width / torus.value,
          math.log(torus.unclipped), torus.samples, torus.method)
    return t.render(), False


def cmd_sublevel(run):
    f = run.filter
    L = float(run.task.get("L", 1.0))
    v = _floats(run.task.get("v", [0.5]))
    t = Table(["v", "L", "measure", "method"])
    for vv, m in sublevel_measure(f, L, v, grid=int(run.task.get("grid", 200_000))):
        t.add(vv, L, m, "grid_bisection")
    return t.render(), False


def cmd_fhat(run):
    e = RefinableEvaluator(run.filter, tail_eps=run.tail_eps())
    y = _grid(run.task, (-10.0, 10.0, 201))
    vals = eval_fhat(e, y)
    t = Table(["y", "re", "im", "abs", "tail_eps", "method"])
    for yy, v in zip(y, np.atleast_1d(vals)):
        t.add(yy, v.real, v.imag, abs(v), e.tail_eps, "truncated_product")
    return t.render(), False


def cmd_rho(run):
    e = RefinableEvaluator(run.filter, tail_eps=run.tail_eps())
    L_grid = _floats(run.task.get("L_grid", [1e3, 1e4, 1e5, 1e6]))
    r = estimate_rho(e, L_grid, panels_per_unit=int(run.task.get("panels_per_unit", 64)),
                     method=run.task.get("method", "scales"), threads=run.args.threads, seed=run.seed)
    t = Table(["L", "mean", "rho_fit", "rho_numeric", "rho_closed", "rho_closed_half_width",
               "extrapolation_residual", "method"])
    hw = r.mahler.half_width / (r.mahler.value * math.log(abs(run.filter.lam)))
    for L, m in zip(r.L_grid, r.raw_means):
        t.add(L, m, r.fit(L), r.rho_numeric, r.rho_closed, hw, r.extrapolation_residual,
              f"{r.method}+{r.mahler.method}")
    return t.render(), False


def cmd_scaling(run):
    e = RefinableEvaluator(run.filter, tail_eps=run.tail_eps())
    k_max = int(run.task.get("k_max", 30))
    if run.args.q is not None or "q" in run.task:
        _, _, b = alpha_from_rational_vector(run.ctx, run.q())
        alpha = list(b)
    elif "alpha" in run.task:
        alpha = float(run.task["alpha"])
    else:
        raise errors.ValidationError("scaling needs alpha or q")
    t = Table(["k", "abs_fhat", "ratio", "re", "im", "tail_eps", "method"])
    for row in scaling_sequence(e, alpha, k_max):
        t.add(row.k, abs(row.fhat), row.ratio, row.fhat.real, row.fhat.imag, e.tail_eps, "truncated_product_mp")
    return t.render(), False


def cmd_orbit(run):
    ctx = run.ctx
    o = torus_orbit(ctx, run.q())
    out = {"preperiod": o.preperiod, "period": o.period, "alpha": o.alpha,
           "seed_q": [str(x) for x in o.seed_q], "cycle": [[str(x) for x in s.as_fractions()] for s in o.cycle]}
    spec = run.args.filter or run.problem.get("filter") or "bernoulli"
    f, _ = filter_from_spec(spec, ctx) if isinstance(spec, str) else (run.filter, None)
    if f.all_zlambda:
        try:
            cm = cycle_mean_log(to_trig_poly(f), o)
            out["cycle_mean_log"] = cm
            out["limit"] = cm / math.log(abs(ctx.lam))
        except errors.ZeroOnCycle as exc:
            out["cycle_mean_log"] = None
            out["zero_on_cycle"] = str(exc.state)
    return _dump_json(out), True


def _sigma(run):
    s = run.task.get("sigma")
    if run.args.sigma is not None:
        s = run.args.sigma
    if s is None:
        raise errors.ValidationError("sigma is required (--sigma or task.sigma)")
    return AdmissibleVector.for_context(run.ctx, _floats(s))


def _L(run, default):
    if run.args.L is not None:
        return run.args.L
    return float(run.task.get("L", default))


def cmd_lattice(run):
    w = enumerate_window(run.ctx, _sigma(run), _L(run, 10.0))
    n = run.ctx.n
    t = Table(["value"] + [f"l{i + 1}" for i in range(n)])
    for v, c in w.points:
        t.add(v, *c)
    return t.render(), False


def cmd_multiscale(run):
    r = multiscale_check(run.ctx, _sigma(run), run.filter, _L(run, 10.0))
    out = {"holds": r.holds, "xi": list(r.xi), "checked": r.checked, "failures": [list(c) for c in r.failures]}
    if not r.holds:
        print(_dump_json(out), file=sys.stderr, end="")
        raise errors.PropertyViolation(f"{len(r.failures)} inclusions fail")
    return _dump_json(out), True


def cmd_diffraction(run):
    w = enumerate_window(run.ctx, _sigma(run), _L(run, 100.0))
    y = _grid(run.task, (0.0, 3.0, 301))
    t = Table(["y", "abs_S", "points", "method"])
    for yy, s in zip(y, diffraction_sample(w, y)):
        t.add(yy, s, len(w), "direct_sum")
    return t.render(), False


HANDLERS = {
    "context": cmd_context,
    "mahler": cmd_mahler,
    "filter-mean": cmd_filter_mean,
    "sublevel": cmd_sublevel,
    "fhat": cmd_fhat,
    "rho": cmd_rho,
    "scaling": cmd_scaling,
    "orbit": cmd_orbit,
    "lattice": cmd_lattice,
    "multiscale": cmd_multiscale,
    "diffraction": cmd_diffraction,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--problem", type=Path, help="JSON problem file")
    common.add_argument("--out", type=Path, help="output path (default: stdout)")
    common.add_argument("--manifest", type=Path, help="run-manifest path (default: next to --out)")
    common.add_argument("--seed", type=int, help="seed for randomized QMC batches")
    common.add_argument("--threads", type=int, help="worker threads (default: REFLAB_THREADS or all cores)")
    common.add_argument("--tolerance", type=float, help="truncation tolerance for fhat products")
    common.add_argument("--minpoly", help='minimal polynomial, e.g. "z^2-z-1"')
    common.add_argument("--filter", help="named filter: box, cantor, three_term, growth, bernoulli")
    common.add_argument("--poly", help="integer polynomial for mahler, e.g. 'z^2-z-1'")
    common.add_argument("--q", help="rational vector, e.g. 1/3,0")
    common.add_argument("--sigma", help="admissible vector, e.g. 0,1")
    common.add_argument("--L", type=float, help="window half-width")
    p = argparse.ArgumentParser(prog="reflab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"reflab {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for c in COMMANDS:
        sub.add_parser(c, parents=[common])
    return p


def _manifest(args, argv, problem, seed, elapsed, out_path):
    import mpmath
    import scipy

    return {
        "command": args.command,
        "argv": list(argv),
        "problem": problem,
        "seed": seed,
        "threads": args.threads,
        "output": str(out_path) if out_path else None,
        "elapsed_seconds": elapsed,
        "versions": {
            "reflab": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "mpmath": mpmath.__version__,
        },
    }


def run(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    t0 = time.perf_counter()
    try:
        problem = load_problem(args.problem) if args.problem else {}
        validate_problem(problem, args.command)
        r = Run(args, problem)
        text, _ = HANDLERS[args.command](r)
    except errors.ReflabError as exc:
        print(f"reflab {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    elapsed = time.perf_counter() - t0
    if args.out:
        args.out.write_text(text)
    else:
        sys.stdout.write(text)
    man_path = args.manifest or (args.out.with_name(args.out.name + ".manifest.json") if args.out else None)
    if man_path:
        man_path.write_text(_dump_json(_manifest(args, argv, problem, r.seed, elapsed, args.out)))
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
