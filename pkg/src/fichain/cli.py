"""Command-line interface: ``fichain <command> [options]``.

Every command prints one JSON document {"config", "result", "checks"} (or a
CSV table with ``--format csv``).  Exit status is 0 on success, 1 on invalid
input and 2 when a verification check fails.
"""

from __future__ import annotations

import argparse
import ast
import csv
import io
import json
import math
import operator
import sys
from decimal import Decimal
from fractions import Fraction

import numpy as np

from . import __version__
from .errors import FIChainError
from .geometry import LatticeSpec, as_fraction, build_geometry, coupling_identities, gradient_residual

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_VERIFY = 2


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """Usage errors exit with the input-error status, keeping 2 for failed checks."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# Parsing beta
# ---------------------------------------------------------------------------

_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}
_UNARY = {ast.UAdd: operator.pos, ast.USub: operator.neg}
_NAMES = {"pi": math.pi, "e": math.e, "tau": math.tau}
_FUNCS = {"sqrt": math.sqrt, "exp": math.exp, "log": math.log, "cbrt": lambda x: math.copysign(abs(x) ** (1 / 3), x)}


def _eval_expr(node):
    if isinstance(node, ast.Expression):
        return _eval_expr(node.body)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        return float(node.value)
    if isinstance(node, ast.Name) and node.id in _NAMES:
        return _NAMES[node.id]
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](_eval_expr(node.left), _eval_expr(node.right))
    if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY:
        return _UNARY[type(node.op)](_eval_expr(node.operand))
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in _FUNCS and len(node.args) == 1:
        return _FUNCS[node.func.id](_eval_expr(node.args[0]))
    raise InputError("unsupported element in beta expression")


def parse_beta(text: str, approx_digits: int | None = None) -> Fraction:
    """Exact rational from "P/Q" or a decimal; with approx_digits, a rounded real expression."""
    if approx_digits is None:
        try:
            return as_fraction(text)
        except (FIChainError, ValueError, TypeError) as exc:
            raise InputError(f"beta must be 'P/Q' or a decimal, got {text!r}") from exc
    if approx_digits < 1:
        raise InputError("--irrational-approx needs a positive digit count")
    try:
        value = _eval_expr(ast.parse(text, mode="eval"))
    except (SyntaxError, ZeroDivisionError, ValueError, OverflowError) as exc:
        raise InputError(f"cannot evaluate beta expression {text!r}") from exc
    if not math.isfinite(value):
        raise InputError("beta expression is not finite")
    return Fraction(Decimal(repr(value)).quantize(Decimal(1).scaleb(-approx_digits)))


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------


def _to_plain(obj):
    if isinstance(obj, dict):
        return {str(k): _to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_to_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_to_plain(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, Fraction):
        return str(obj)
    return obj


def _dump(obj) -> str:
    """JSON with sorted keys and floats at 17 significant digits."""
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(k)}: {_dump(obj[k])}" for k in sorted(obj)) + "}"
    if isinstance(obj, list):
        return "[" + ", ".join(_dump(v) for v in obj) + "]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return format(obj, ".17g") if math.isfinite(obj) else "null"
    return json.dumps(obj)


def render_json(config: dict, result: dict, checks: list) -> str:
    return _dump(_to_plain({"config": config, "result": result, "checks": checks})) + "\n"


def render_csv(header: list, rows: list) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format(x, ".17g") if isinstance(x, float) else x for x in _to_plain(list(row))])
    return buf.getvalue()


def check(name: str, passed: bool, detail) -> dict:
    return {"name": name, "passed": bool(passed), "detail": detail}


def _key_record(key, beta: Fraction) -> dict:
    return {"A": key.A, "B": key.B, "energy": float(key.value(beta)), "energy_exact": key.value(beta)}


# ---------------------------------------------------------------------------
# Commands: each returns (result, checks, table-or-None)
# ---------------------------------------------------------------------------


def cmd_sites(args, beta):
    geo = build_geometry(LatticeSpec(args.n, beta))
    res = gradient_residual(geo.zeta, beta)
    ids = coupling_identities(geo)
    result = {
        "zeta": geo.zeta,
        "xi": geo.xi,
        "h": geo.h,
        "max_residual": float(np.max(np.abs(res))),
        "identities": [
            {"name": c.name, "lhs": c.lhs, "rhs": c.rhs, "abs_error": c.abs_error, "rel_error": c.rel_error}
            for c in ids
        ],
    }
    checks = [check("critical_point_residual", result["max_residual"] <= 1e-9, result["max_residual"])]
    checks += [check(c.name, c.rel_error <= 1e-9, c.rel_error) for c in ids]
    table = (["i", "zeta", "xi"], [(i + 1, float(z), float(x)) for i, (z, x) in enumerate(zip(geo.zeta, geo.xi))])
    return result, checks, table


def _table(args, beta):
    from .motifs import spectrum

    return spectrum(
        args.n, args.m, args.epsilon, beta, family=args.family, merge=not args.approx, level_cap=args.level_cap
    )


def cmd_spectrum(args, beta):
    table = _table(args, beta)
    levels = []
    for key, deg in table.sorted_levels():
        rec = _key_record(key, beta)
        rec["degeneracy"] = str(deg)
        levels.append(rec)
    result = {"levels": levels, "n_levels": len(levels), "total": str(table.total), "merged": table.merged}
    checks = [check("total_degeneracy", table.total == args.m**args.n, f"{table.total} of {args.m ** args.n}")]
    rows = [(r["A"], r["B"], r["energy"], r["degeneracy"]) for r in levels]
    return result, checks, (["A", "B", "energy", "degeneracy"], rows)


def _q_from_args(args) -> float:
    if args.q is not None:
        return args.q
    if args.T is not None:
        if args.T <= 0:
            raise InputError("T must be positive")
        return math.exp(-1.0 / args.T)
    raise InputError("give --T or --q")


def cmd_partition(args, beta):
    from .motifs import partition_eval

    q = _q_from_args(args)
    table = _table(args, beta)
    cmp = partition_eval(args.n, args.m, args.epsilon, beta, q, family=args.family, table=table)
    result = {"q": q, "composition_sum": cmp.composition_sum, "table_sum": cmp.table_sum, "rel_diff": cmp.rel_diff}
    return result, [check("dual_method_agreement", cmp.rel_diff <= 1e-10, cmp.rel_diff)], None


def cmd_extremes(args, beta):
    from .motifs import extremes

    ext = extremes(args.n, args.m, beta)
    result = {
        "E_min": _key_record(ext.E_min, beta),
        "E_max": _key_record(ext.E_max, beta),
        "min_motif": list(ext.min_motif.delta),
        "j_range": list(ext.j_range),
    }
    return result, [], None


def cmd_ed_verify(args, beta):
    from .ed import build_hamiltonian, eigenvalues, verify_against_motifs
    from .motifs import energy_sum

    geo = build_geometry(LatticeSpec(args.n, beta))
    H = build_hamiltonian(geo, args.m, args.epsilon, dim_cap=args.dim_cap)
    eigs = eigenvalues(H)
    table = _table(args, beta)
    top = float(energy_sum(args.n).value(beta)) if args.n > 1 else 0.0
    tol = args.tol if args.tol is not None else 1e-7 * max(1.0, abs(top))
    rep = verify_against_motifs(eigs, table, tol=tol)
    result = {"dimension": int(H.shape[0]), "max_abs_error": rep.max_abs_error, "tol": tol, "eigenvalues": eigs}
    rows = [(i, float(e)) for i, e in enumerate(eigs)]
    return result, [check("ed_matches_motifs", rep.passed, rep.max_abs_error)], (["index", "eigenvalue"], rows)


def cmd_freeze_verify(args, beta):
    from .dynamics import freezing_ratio_check

    if args.T is None or args.T <= 0:
        raise InputError("freeze-verify needs a positive --T")
    a_values = [as_fraction(x) for x in args.a_list.split(",") if x.strip()]
    rep = freezing_ratio_check(args.n, args.m, args.epsilon, beta, args.T, a_values)
    probes = [{"a": p.a, "n_max": p.n_max, "ratio": p.ratio, "error": p.error} for p in rep.probes]
    result = {"chain_Z": rep.chain_Z, "probes": probes, "halving_ratios": rep.halving_ratios}
    checks = [
        check("monotone_decrease", rep.monotone, rep.errors),
        check("halving_ratio_in_0.3_0.7", rep.ratios_within(), rep.halving_ratios),
    ]
    rows = [(str(p.a), p.n_max, p.ratio, p.error) for p in rep.probes]
    return result, checks, (["a", "n_max", "ratio", "error"], rows)


def cmd_dunkl_verify(args, beta):
    from .dunkl import triangularity_report

    a = as_fraction(args.a)
    b = as_fraction(args.b)
    rep = triangularity_report(args.n, args.n_cap, a, b)
    result = {
        "basis_size": rep.basis_size,
        "violations": {k: [[list(x[0]), list(x[1]), x[2]] for x in v] for k, v in rep.violations.items()},
        "h_diagonal": [{"n": list(n), "value": v} for n, v in sorted(rep.h_diagonal.items())],
    }
    checks = [check(name, not v, len(v)) for name, v in rep.violations.items()]
    return result, checks, None


def cmd_stats(args, beta):
    from .stats import closed_form_moments, empirical_moments, gaussian_comparison, level_density_histogram

    table = _table(args, beta)
    closed = closed_form_moments(args.n, args.m, beta, args.epsilon)
    emp = empirical_moments(table)
    gc = gaussian_comparison(table)
    bins = args.bins if args.bins is None or not args.bins.isdigit() else int(args.bins)
    hist = level_density_histogram(table, bins=bins or "fd")
    result = {
        "mu": float(closed.mu),
        "sigma2": float(closed.sigma2),
        "mu_exact": closed.mu,
        "sigma2_exact": closed.sigma2,
        "empirical_mu": float(emp.mu),
        "empirical_sigma2": float(emp.sigma2),
        "gaussian_sup_distance": gc.sup_distance,
        "histogram": {"edges": hist.edges, "density": hist.density, "rule": hist.rule},
    }
    exact = not table.merged or (emp.mu == closed.mu and emp.sigma2 == closed.sigma2)
    checks = [check("moments_match_closed_form", exact, {"mu": emp.mu, "sigma2": emp.sigma2})]
    rows = [(float(l), float(r), float(d)) for l, r, d in zip(hist.edges[:-1], hist.edges[1:], hist.density)]
    return result, checks, (["left", "right", "density"], rows)


def cmd_spacings(args, beta):
    from .stats import compare_spacings_law, regime_diagnostics, spacings_law_params, unfold_and_spacings

    table = _table(args, beta)
    unf = unfold_and_spacings(table)
    params = spacings_law_params(args.n, args.m, beta, args.epsilon)
    cmp = compare_spacings_law(unf, params, points=args.grid_points)
    diag = regime_diagnostics(table)
    result = {
        "levels": unf.levels,
        "eta": unf.eta,
        "spacings": unf.spacings,
        "s_max": params.s_max,
        "s0": params.s0,
        "grid": cmp.grid,
        "empirical_cdf": cmp.empirical,
        "law_cdf": cmp.law,
        "rms": cmp.rms,
        "dominant_difference": diag.dominant,
        "dominant_fraction": diag.dominant_fraction,
        "difference_histogram": [[d, c] for d, c in diag.histogram.items()],
        "scatter": diag.scatter,
        "clusters": [[j, str(d)] for j, d in diag.clusters.items()],
        "j_range": diag.j_range,
        "clusters_within_range": diag.clusters_within_range,
    }
    rows = [(i, float(unf.levels[i]), float(unf.eta[i]), float(s)) for i, s in enumerate(unf.spacings)]
    return result, [], (["index", "level", "eta", "spacing"], rows)


COMMANDS = {
    "sites": cmd_sites,
    "spectrum": cmd_spectrum,
    "partition": cmd_partition,
    "extremes": cmd_extremes,
    "ed-verify": cmd_ed_verify,
    "freeze-verify": cmd_freeze_verify,
    "dunkl-verify": cmd_dunkl_verify,
    "stats": cmd_stats,
    "spacings": cmd_spacings,
}


def _epsilon(text: str) -> int:
    value = int(text)
    if value not in (1, -1):
        raise argparse.ArgumentTypeError("epsilon must be 1 or -1")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fichain", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int, required=True, help="number of sites N")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--out", help="write to this path instead of stdout")

    chain = argparse.ArgumentParser(add_help=False)
    chain.add_argument("--beta", required=True, help="'P/Q', a decimal, or an expression with --irrational-approx")
    chain.add_argument("--irrational-approx", type=int, metavar="DIGITS", dest="irrational_approx")

    spin = argparse.ArgumentParser(add_help=False)
    spin.add_argument("--m", type=int, default=2, help="number of internal states (default 2)")
    spin.add_argument("--epsilon", type=_epsilon, default=-1, help="+1 ferromagnetic, -1 antiferromagnetic")
    spin.add_argument("--family", choices=("FI", "HS", "PF"), default="FI")
    spin.add_argument("--level-cap", type=int, default=10**7, dest="level_cap")

    sub.add_parser("sites", parents=[common, chain], help="Laguerre-zero sites, couplings, identities")
    sub.add_parser("spectrum", parents=[common, chain, spin], help="exact spectrum with degeneracies")
    p = sub.add_parser("partition", parents=[common, chain, spin], help="partition function two ways")
    p.add_argument("--T", type=float)
    p.add_argument("--q", type=float)
    sub.add_parser("extremes", parents=[common, chain, spin], help="extreme energies and minimum motif")
    p = sub.add_parser("ed-verify", parents=[common, chain, spin], help="exact diagonalization vs motifs")
    p.add_argument("--dim-cap", type=int, default=4096, dest="dim_cap")
    p.add_argument("--tol", type=float)
    p = sub.add_parser("freeze-verify", parents=[common, chain, spin], help="freezing-trick convergence in a")
    p.add_argument("--T", type=float, required=True)
    p.add_argument("--a-list", default="50,100,200", dest="a_list")
    p = sub.add_parser("dunkl-verify", parents=[common], help="triangularity of Dunkl operators")
    p.add_argument("--n-cap", type=int, default=2, dest="n_cap")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p = sub.add_parser("stats", parents=[common, chain, spin], help="moments, Gaussian distance, histogram")
    p.add_argument("--bins", default=None, help="bin count or numpy rule (default Freedman-Diaconis)")
    p = sub.add_parser("spacings", parents=[common, chain, spin], help="unfolding, spacings, regime diagnostics")
    p.add_argument("--grid-points", type=int, default=400, dest="grid_points")
    return parser


def _config(args, beta) -> dict:
    cfg = {k: v for k, v in vars(args).items() if k not in ("out", "approx") and v is not None}
    if beta is not None:
        cfg["beta"] = beta
        cfg["beta_approximation"] = bool(args.approx)
    cfg["version"] = __version__
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        beta = None
        args.approx = getattr(args, "irrational_approx", None) is not None
        if hasattr(args, "beta"):
            beta = parse_beta(args.beta, getattr(args, "irrational_approx", None))
        result, checks, table = COMMANDS[args.command](args, beta)
        if args.format == "csv":
            if table is None:
                raise InputError(f"{args.command} has no tabular output; use --format json")
            text = render_csv(*table)
        else:
            text = render_json(_config(args, beta), result, checks)
    except (InputError, FIChainError, ValueError, ZeroDivisionError) as exc:
        print(f"fichain: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK if all(c["passed"] for c in checks) else EXIT_VERIFY


if __name__ == "__main__":
    sys.exit(main())
