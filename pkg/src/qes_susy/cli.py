"""Batch command-line interface: every result is written as CSV or JSON.

Exit codes: 0 success, 1 numerical failure, 2 invalid arguments.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from fractions import Fraction

import mpmath
import numpy as np
import scipy

from . import __version__
from .errors import DomainError, NodalSeedError, QesError, SingularPartnerError, UnsupportedError
from .model import PotentialSpec, Variant, evaluate_wavefunction
from .surd import Surd

PRECISION_ENV = "QES_PRECISION"
DIGITS = {"double": 15, "extended": 20}


class UsageError(Exception):
    pass


def number(text: str):
    """int, p/q Fraction or float, parsed from a flag value."""
    try:
        if "/" in text:
            return Fraction(text)
        f = Fraction(text)
        return int(f) if f.denominator == 1 else float(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from exc


def number_list(text: str) -> list:
    """Comma-separated numbers; lets negative fractions through as --Ngrid=-1,-1/2."""
    return [number(t) for t in text.split(",") if t]


def fmt(v, digits: int) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer, Fraction)):
        return str(v)
    if isinstance(v, Surd):
        return str(v)
    if isinstance(v, str):
        return v
    if v is None:
        return ""
    if isinstance(v, mpmath.mpf):
        return mpmath.nstr(v, digits, min_fixed=-4, max_fixed=6)
    return format(float(v), f".{digits}g")


# --------------------------------------------------------------------------
# output


def provenance(args, extra: dict | None = None) -> dict:
    meta = {
        "command": args.command,
        "package": f"qes_susy {__version__}",
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "mpmath": mpmath.__version__,
        "precision": args.precision,
    }
    for k, v in sorted(vars(args).items()):
        if k not in ("command", "precision", "output", "format", "func") and v is not None:
            if isinstance(v, (list, tuple)):
                v = [x if isinstance(x, (int, float)) else str(x) for x in v]
            meta[k] = v if isinstance(v, (int, float, str, bool, list)) else str(v)
    if extra:
        meta.update({k: v if isinstance(v, (int, str, bool)) else fmt(v, DIGITS[args.precision])
                     for k, v in extra.items()})
    return meta


def emit(args, columns, rows, meta: dict | None = None):
    digits = DIGITS[args.precision]
    meta = provenance(args, meta)
    cells = [[fmt(v, digits) for v in row] for row in rows]
    if args.format == "json":
        text = json.dumps({"meta": meta, "columns": columns, "rows": cells}, indent=1, ensure_ascii=False) + "\n"
    else:
        buf = io.StringIO()
        for k, v in meta.items():
            buf.write(f"# {k}: {v}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        w.writerows(cells)
        text = buf.getvalue()
    if args.output and args.output != "-":
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def grid(args) -> np.ndarray:
    if args.points < 2 or not args.xmax > args.xmin:
        raise UsageError("grid needs --points >= 2 and --xmax > --xmin")
    return np.linspace(args.xmin, args.xmax, args.points)


# --------------------------------------------------------------------------
# commands


def cmd_algebraic(args):
    from .algebraic import algebraic_spectrum

    spec = PotentialSpec(args.nu, args.mu, args.N)
    spec.require_integer_N()
    rows = [[s.level.n, s.energy, float(s.energy), str(s.P)] for s in algebraic_spectrum(spec)]
    emit(args, ["n", "E_exact_form", "E", "P(z)"], rows)


def cmd_er(args):
    from .algebraic import er_symmetry_check

    spec = PotentialSpec(args.nu, 0, args.N, args.kappa, Variant.ER)
    spec.require_integer_N()
    rep = er_symmetry_check(spec)
    rows = [[i, e, float(e)] for i, e in enumerate(rep.energies)]
    emit(args, ["index", "E_exact_form", "E"], rows, {"symmetric": bool(rep.symmetric)})


def cmd_susy1(args):
    from .susy1 import build_partner, decompose_partner, zero_modes

    spec = PotentialSpec(args.nu, args.mu, args.N)
    rec = build_partner(spec)
    if args.emit == "potential":
        xs = grid(args)
        emit(args, ["x", "V0", "V1"], [[x, float(rec.spec.base_polynomial()(float(x))), v]
                                       for x, v in zip(xs, rec.potential(xs))], {"V1": str(rec.partner)})
    elif args.emit == "wavefunctions":
        xs = grid(args)
        states = [rec.missing_state] + [s for s in rec.mapped_states]
        cols = ["x", "phi_missing"] + [f"phi_{i + 1}" for i in range(len(states) - 1)]
        vals = [evaluate_wavefunction(s, xs) for s in states]
        emit(args, cols, [[x] + [v[i] for v in vals] for i, x in enumerate(xs)])
    elif args.emit == "decomposition":
        d = decompose_partner(rec)
        emit(args, ["term", "value"], [["shifted_N", str(d.shifted.N)], ["constant", d.constant], ["Q", str(d.Q)],
                                       ["R", str(d.R)], ["P0", str(d.P0)]])
    else:
        emit(args, ["lambda", "p"], [[lam, str(p)] for lam, p in zero_modes(spec)])


def cmd_susy2(args):
    from .mesh import build_mesh, solve
    from .susy2 import make_chain

    chain = make_chain(args.nu, args.N, args.kappa, args.seed, args.omega0)
    extra = {"epsilon": chain.eps, "omega0": chain.omega0, "w_star": chain.w_star}
    if args.emit == "spectrum":
        mesh = build_mesh(args.M, args.scale or 0.18)
        e0 = solve(PotentialSpec(args.nu, 0, args.N, args.kappa, Variant.ER), mesh, args.states).energies
        e2 = solve(chain.potential, mesh, args.states).energies
        emit(args, ["n", "E_V0", "E_V2", "difference"], [[n, a, b, b - a] for n, (a, b) in enumerate(zip(e0, e2))],
             extra)
        return
    xs = grid(args)
    if args.emit == "potential":
        rows = list(zip(xs, chain.V0(xs), chain.potential(xs)))
        emit(args, ["x", "V0", "V2"], rows, extra)
    elif args.emit == "omega":
        emit(args, ["x", "omega"], list(zip(xs, chain.omega(xs))), extra)
    else:
        phi = chain.missing_state(xs)
        emit(args, ["x", "phi_missing"], list(zip(xs, phi)), extra)


def _spec_from(args):
    return PotentialSpec(args.nu, args.mu, args.N, args.kappa, Variant.ER if args.kappa else Variant.QES)


def cmd_mesh(args):
    from .mesh import auto_scale, build_mesh, solve

    spec = _spec_from(args)
    scale = args.scale or auto_scale(spec, args.M, args.states)
    res = solve(spec, build_mesh(args.M, scale), args.states, precision=args.precision)
    rows = [[n, e, x2] for n, (e, x2) in enumerate(zip(res.energies, res.expectation_x2))]
    emit(args, ["n", "E", "⟨x²⟩"], rows, {"M": args.M, "scale": scale})


def cmd_wkb(args):
    from .wkb import wkb_table

    res = wkb_table(_spec_from(args), args.nmax)
    emit(args, ["n", "E_WKB", "x_turn"], [[n, e, tp[1]] for n, (e, tp) in enumerate(zip(res.energies, res.turning_points))])


def cmd_variational(args):
    from .susy1 import build_partner
    from .variational import Parity, TrialBasis, solve_variational, susy_map_trial

    spec = PotentialSpec(args.nu, args.mu, args.N)
    parity = Parity[args.parity.upper()]
    rows = []
    chain = build_partner(spec) if args.susy else None
    for k in args.k:
        r = solve_variational(TrialBasis(parity, k), spec)
        row = [k, r.energy, " ".join(mpmath.nstr(c, 10) for c in r.coefficients)]
        if chain is not None:
            row.append(susy_map_trial(r, chain)[1])
        rows.append(row)
    cols = ["k", "E_var", "coefficients"] + (["<H1>"] if chain is not None else [])
    emit(args, cols, rows)


def cmd_tables(args):
    from .tables import build_table

    for which in args.which:
        t = build_table(which, args.precision)
        sub = argparse.Namespace(**vars(args))
        if args.output and args.output != "-" and len(args.which) > 1:
            root, ext = os.path.splitext(args.output)
            sub.output = f"{root}_{which}{ext}"
        sub.which = which
        emit(sub, t.columns, t.rows, t.meta)


def cmd_scan(args):
    from .mesh import auto_scale, build_mesh, scan_energies

    args.Ngrid = [N for group in args.Ngrid for N in group]
    template = PotentialSpec(args.nu, args.mu, 0)
    scale = args.scale or auto_scale(template, args.M, args.states)
    tab = scan_energies(template, args.Ngrid, args.states, build_mesh(args.M, scale), precision=args.precision)
    rows = [[N] + list(e) for N, e in zip(tab.N, tab.energies)]
    emit(args, ["N"] + [f"E{n}" for n in range(args.states)], rows,
         {"M": args.M, "scale": scale, "monotone_decreasing": tab.monotone_decreasing()})


def cmd_nc(args):
    from .mesh import auto_scale, build_mesh, find_Nc

    template = PotentialSpec(args.nu, args.mu, 0)
    scale = args.scale or auto_scale(template, args.M, 1)
    with mpmath.workdps(40):
        r = find_Nc(template, tuple(args.bracket), build_mesh(args.M, scale), precision=args.precision)
        rows = [[i, N, E] for i, (N, E) in enumerate(r.trace)]
    emit(args, ["step", "N", "E0"], rows, {"Nc": r.Nc, "E0_at_Nc": r.E0, "M": args.M, "scale": scale})


# --------------------------------------------------------------------------
# parser


def _common(p, precision_default):
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--output", "-o", default="-", help="output file (default stdout)")
    p.add_argument("--precision", choices=["double", "extended"], default=precision_default)


def _params(p, nu=True, mu=True, N=True, kappa=False):
    if nu:
        p.add_argument("--nu", type=number, default=1)
    if mu:
        p.add_argument("--mu", type=number, default=1)
    if N:
        p.add_argument("--N", type=number, default=0)
    if kappa:
        p.add_argument("--kappa", type=int, choices=[0, 1], default=0)


def _grid_args(p, lo=-3.0, hi=3.0, n=121):
    p.add_argument("--xmin", type=float, default=lo)
    p.add_argument("--xmax", type=float, default=hi)
    p.add_argument("--points", type=int, default=n)


def build_parser() -> argparse.ArgumentParser:
    env = os.environ.get(PRECISION_ENV, "double")
    if env not in DIGITS:
        env = "double"
    parser = argparse.ArgumentParser(prog="qes-susy", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("algebraic", help="exact levels of the algebraic sector")
    _params(p)
    p.set_defaults(func=cmd_algebraic)

    p = sub.add_parser("er", help="energy-reflection spectrum at mu = 0")
    _params(p, mu=False, kappa=True)
    p.set_defaults(func=cmd_er)

    p = sub.add_parser("susy1", help="first-order SUSY partner")
    _params(p)
    p.add_argument("--emit", choices=["potential", "wavefunctions", "decomposition", "zero-modes"], default="potential")
    _grid_args(p)
    p.set_defaults(func=cmd_susy1)

    p = sub.add_parser("susy2", help="confluent second-order SUSY partner")
    _params(p, mu=False, kappa=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--omega0", type=float, default=None)
    p.add_argument("--emit", choices=["potential", "omega", "missing-state", "spectrum"], default="potential")
    p.add_argument("--M", type=int, default=400)
    p.add_argument("--scale", type=float, default=None)
    p.add_argument("--states", type=int, default=6)
    _grid_args(p)
    p.set_defaults(func=cmd_susy2)

    p = sub.add_parser("mesh", help="Lagrange-mesh spectrum for any real N")
    _params(p, kappa=True)
    p.add_argument("--M", type=int, default=100)
    p.add_argument("--scale", type=float, default=None)
    p.add_argument("--states", type=int, default=10)
    p.set_defaults(func=cmd_mesh)

    p = sub.add_parser("wkb", help="leading-order WKB levels")
    _params(p, kappa=True)
    p.add_argument("--nmax", type=int, default=9)
    p.set_defaults(func=cmd_wkb)

    p = sub.add_parser("variational", help="Rayleigh-Ritz trial bases")
    _params(p)
    p.add_argument("--parity", choices=["odd", "even"], default="odd")
    p.add_argument("--k", type=int, nargs="+", default=[1, 2, 3, 4, 5, 6])
    p.add_argument("--susy", action="store_true", help="also report <H1> on the SUSY image")
    p.set_defaults(func=cmd_variational)

    p = sub.add_parser("tables", help="regenerate the published tables with deviations")
    p.add_argument("--which", type=int, nargs="+", choices=range(1, 7), default=[1])
    p.set_defaults(func=cmd_tables)

    p = sub.add_parser("scan", help="E_n(N) over a grid of N")
    _params(p, N=False)
    p.add_argument("--Ngrid", type=number_list, nargs="+", required=True,
                   help="N values, space or comma separated (use --Ngrid=-1,-1/2,... for negative fractions)")
    p.add_argument("--states", type=int, default=3)
    p.add_argument("--M", type=int, default=100)
    p.add_argument("--scale", type=float, default=None)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("nc", help="critical N where the ground-state energy vanishes")
    _params(p, N=False)
    p.add_argument("--bracket", type=float, nargs=2, default=[0.5, 1.0])
    p.add_argument("--M", type=int, default=None)
    p.add_argument("--scale", type=float, default=None)
    p.set_defaults(func=cmd_nc)

    for sp in sub.choices.values():
        _common(sp, env)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with status 2 on bad flags
    if getattr(args, "M", 0) is None:
        args.M = 200 if args.precision == "extended" else 100
    try:
        args.func(args)
    except (UsageError, DomainError, SingularPartnerError, NodalSeedError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (UnsupportedError, QesError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
