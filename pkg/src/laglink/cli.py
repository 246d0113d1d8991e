"""Command-line front end.

Exit codes: 0 every check passed, 1 I/O failure, 2 a check failed,
3 malformed input (bad flags, schema errors).
"""
from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from . import formats
from .errors import (
    BadParams,
    ClosureDefectExceeded,
    LaglinkError,
    LoopTouchesTorus,
    MatchingInvalid,
    Monotone,
    MovieInvalid,
    NoMaslovTwoClass,
    NonTransversalCrossing,
    NoPositiveArea,
    OutOfValidityBox,
    SchemaError,
)
from .geom_core import sample_chekanov, sample_clifford
from .invariant_lattice import (
    H1LatticeData,
    TorusDescriptor,
    a2,
    area_text,
    as_area,
    capacity_polydisk,
    chekanov_descriptor,
    clifford_descriptor,
    embedding_obstruction,
    maslov_zero_min_positive_area,
    mu_two_basis,
    product_torus_lattice,
    unlinking_verdict,
)
from .linking import CliffordTorus, homological_linking_certificate, intersection_number, pi1_class
from .movie_builder import lift, linked_cylinder_contract, linked_cylinder_movie, linked_pair, validate_movie
from .sft_auditor import audit_building

EXIT_OK, EXIT_IO, EXIT_CHECK, EXIT_SCHEMA = 0, 1, 2, 3
CHECK_ERRORS = (ClosureDefectExceeded, LoopTouchesTorus, MovieInvalid, NonTransversalCrossing, OutOfValidityBox)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # argparse would exit 2, which means "check failed" here
        raise UsageError(message)


def _resolution(text: str) -> int:
    n = int(text)
    if n < 64 or n > 4096 or n & (n - 1):
        raise argparse.ArgumentTypeError("resolution must be a power of two in [64, 4096]")
    return n


def _area_value(text: str) -> float:
    try:
        return float(as_area(text))
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not an area: {text!r}") from None


class Context:
    def __init__(self, args: argparse.Namespace):
        self.out = Path(args.out)
        self.resolution: int = args.resolution
        self.tol: float = args.tol
        self.plot: bool = args.plot

    def write(self, name: str, text: str) -> str:
        self.out.mkdir(parents=True, exist_ok=True)
        path = self.out / name
        path.write_text(text)
        return str(path)


def _emit(doc: Any) -> None:
    sys.stdout.write(formats.dumps(doc))


# ---------------------------------------------------------------------------
# construct


def cmd_construct(args: argparse.Namespace, ctx: Context) -> int:
    n = ctx.resolution
    if args.what == "clifford":
        s = sample_clifford(args.r, n)
    elif args.what == "chekanov":
        s = sample_chekanov(args.r, n)
    else:
        return _construct_linked_pair(args, ctx)
    path = ctx.write(f"{args.what}_surface.json", formats.dumps(formats.surface_to_json(s)))
    if ctx.plot:
        _plot(ctx, args.what, formats.surface_plot_paths(s))
    ok = s.lagrangian_defect <= ctx.tol and s.embedded_certificate
    _emit({"surface": path, "lagrangian_defect": s.lagrangian_defect, "embedded_certificate": s.embedded_certificate, "ok": ok})
    return EXIT_OK if ok else EXIT_CHECK


def _construct_linked_pair(args: argparse.Namespace, ctx: Context) -> int:
    n = ctx.resolution
    pair = linked_pair(args.a2_1, args.a2_2, resolution=(n, n), alpha=args.alpha, delta=args.delta)
    movie = linked_cylinder_movie(pair.cylinder)
    report = validate_movie(movie)
    cyl = lift(movie)
    contract = linked_cylinder_contract(cyl, pair.cylinder)
    cert = homological_linking_certificate(pair.L1, [pair.L2.sigma, pair.L2.tau])

    files = {
        "movie": ctx.write("movie.json", formats.dumps(formats.movie_to_json(movie))),
        "cylinder": ctx.write("cylinder_surface.json", formats.dumps(formats.surface_to_json(cyl))),
    }
    checks: dict[str, bool] = {
        "movie_valid": report.ok,
        "cylinder_contract": contract.ok,
        "cylinder_defect": cyl.lagrangian_defect <= ctx.tol,
    }
    tori: dict[str, Any] = {}
    for name, t, target in (("L1", pair.L1, args.a2_1), ("L2", pair.L2, args.a2_2)):
        files[name] = ctx.write(f"{name}.json", formats.dumps(formats.closed_up_to_json(t)))
        files[f"{name}_sigma"] = ctx.write(f"{name}_sigma.csv", formats.loop_to_csv(t.sigma))
        files[f"{name}_tau"] = ctx.write(f"{name}_tau.csv", formats.loop_to_csv(t.tau))
        a2v = float(a2(t.lattice()))
        tori[name] = {
            "a2": a2v,
            "a2_target": target,
            "area_sigma": t.area_sigma,
            "area_tau": t.area_tau,
            "maslov": [t.maslov_sigma, t.maslov_tau],
            "lagrangian_defect": t.surface.lagrangian_defect,
            "embedded_certificate": t.surface.embedded_certificate,
        }
        checks[f"{name}_a2"] = abs(a2v - target) <= 1e-6 * target
        checks[f"{name}_defect"] = t.surface.lagrangian_defect <= ctx.tol
        checks[f"{name}_maslov"] = (t.maslov_sigma, t.maslov_tau) == (2, 2)
    witness = None
    if cert.witness_loop is not None:
        witness = files["witness"] = ctx.write("witness.csv", formats.loop_to_csv(cert.witness_loop))
    files["certificate"] = ctx.write("certificate.json", formats.dumps(formats.certificate_to_json(cert, witness)))
    checks["linked"] = cert.linked and abs(cert.witness_class) == 1
    ok = all(checks.values())
    validation = {
        "ok": ok,
        "checks": checks,
        "tori": tori,
        "movie": {"max_area_drift": report.max_area_drift, "tol_area": report.tol_area, "failures": report.failures()},
        "cylinder": {
            "tail_deviation": contract.tail_deviation,
            "min_distance_to_circle_cylinder": contract.min_distance_to_circle_cylinder,
            "crossings": contract.crossings,
            "lagrangian_defect": cyl.lagrangian_defect,
        },
        "certificate": {"linked": cert.linked, "classes": list(cert.classes), "class": cert.witness_class},
    }
    files["validation"] = ctx.write("validation.json", formats.dumps(validation))
    if ctx.plot:
        _plot(ctx, "linked_pair", formats.surface_plot_paths(pair.L1.surface) + formats.surface_plot_paths(pair.L2.surface))
    _emit({"ok": ok, "checks": checks, "files": files})
    return EXIT_OK if ok else EXIT_CHECK


def _plot(ctx: Context, stem: str, paths: list[np.ndarray]) -> None:
    for plane in (1, 2):
        coords = "x1y1" if plane == 1 else "x2y2"
        ctx.write(f"{stem}_{coords}.svg", formats.svg_projection(paths, plane))


# ---------------------------------------------------------------------------
# invariants and verdicts


def parse_torus(spec: str) -> TorusDescriptor:
    """``clifford:r``, ``chekanov:r``, ``product:r,s`` or a descriptor JSON path."""
    kind, sep, rest = spec.partition(":")
    try:
        if sep and kind == "clifford":
            return clifford_descriptor(rest)
        if sep and kind == "chekanov":
            return chekanov_descriptor(rest)
        if sep and kind == "product":
            r, s = rest.split(",")
            return product_torus_lattice(r, s)
    except (ValueError, ZeroDivisionError) as e:
        raise SchemaError(f"bad torus spec {spec!r}: {e}") from None
    path = Path(spec)
    if not path.exists():
        raise SchemaError(f"unknown torus spec {spec!r}")
    return formats.descriptor_from_json(formats.loads(path.read_text()))


def invariants_doc(d: TorusDescriptor) -> dict[str, Any]:
    lat = d.lattice
    c = d.monotone_factor
    out: dict[str, Any] = {
        "label": d.label,
        "kind": d.kind,
        "mu": list(lat.mu),
        "omega": [area_text(w) for w in lat.omega],
    }
    try:
        a = d.a2
        out["a2"] = area_text(a)
        out["a2_value"] = float(a)
    except (NoMaslovTwoClass, NoPositiveArea) as e:
        out["a2"] = None
        out["a2_error"] = str(e)
    out["monotone"] = c is not None
    out["monotonicity_factor"] = None if c is None else area_text(c)
    out["admissible"] = bool(d.admissible)
    out["admissible_reason"] = d.admissible_reason
    if c is None and out["a2"] is not None:
        basis = mu_two_basis(lat)
        out["mu_infimal"] = list(basis.alpha0)
        out["alpha1"] = list(basis.alpha1)
        out["doubling_ok"] = basis.doubling_ok
        m0 = maslov_zero_min_positive_area(lat)
        out["maslov_zero_min_positive_area"] = "inf" if m0 == math.inf else area_text(m0)
    return out


def cmd_invariants(args: argparse.Namespace, ctx: Context) -> int:
    try:
        if args.what == "product":
            d = product_torus_lattice(args.r, args.s)
        elif args.what == "clifford":
            d = clifford_descriptor(args.r)
        elif args.what == "chekanov":
            d = chekanov_descriptor(args.r)
        elif args.what == "lattice":
            mu = tuple(int(v) for v in args.mu.split(","))
            om = tuple(as_area(v) for v in args.omega.split(","))
            d = TorusDescriptor(H1LatticeData(mu, om, "cli"), "custom")
        else:
            d = parse_torus(args.file)
    except (ValueError, ZeroDivisionError) as e:
        raise SchemaError(str(e)) from None
    _emit(invariants_doc(d))
    return EXIT_OK


def cmd_verdict(args: argparse.Namespace, ctx: Context) -> int:
    L1, L2 = parse_torus(args.l1), parse_torus(args.l2)
    flag = None if args.pi1_trivial is None else args.pi1_trivial == "yes"
    v = unlinking_verdict(L1, L2, flag)
    doc = {"l1": args.l1, "l2": args.l2, "a2_l1": area_text(L1.a2), "a2_l2": area_text(L2.a2)}
    doc.update(v.as_dict())
    _emit(doc)
    return EXIT_OK


# ---------------------------------------------------------------------------
# linking


def cmd_link(args: argparse.Namespace, ctx: Context) -> int:
    if args.loop is not None:
        loop = formats.loop_from_csv(Path(args.loop).read_text())
        d = parse_torus(args.torus)
        if d.kind != "clifford":
            raise SchemaError("loops can be tested against clifford:r tori only")
        torus = CliffordTorus(math.sqrt(float(d.lattice.omega[0]) / math.pi))
        cls = pi1_class(loop, torus)
        rec = intersection_number(loop, torus.spanning).crossings
        _emit(
            {
                "torus": args.torus,
                "class": cls,
                "linked": cls != 0,
                "crossings": [{"t": r.t, "sign": r.sign, "point": list(r.location.as_array())} for r in rec],
            }
        )
        return EXIT_OK
    if args.a2_1 is None or args.a2_2 is None:
        raise UsageError("link needs --loop/--torus or --a2-1/--a2-2")
    n = ctx.resolution
    pair = linked_pair(args.a2_1, args.a2_2, resolution=(n, n))
    cert = homological_linking_certificate(pair.L1, [pair.L2.sigma, pair.L2.tau])
    witness = ctx.write("witness.csv", formats.loop_to_csv(cert.witness_loop)) if cert.witness_loop is not None else None
    doc = formats.certificate_to_json(cert, witness)
    ctx.write("certificate.json", formats.dumps(doc))
    if ctx.plot and cert.witness_loop is not None:
        _plot(ctx, "witness", [pair.L1.sigma.samples, pair.L1.tau.samples, cert.witness_loop.samples])
    _emit(doc)
    return EXIT_OK


# ---------------------------------------------------------------------------
# audit and capacity


def cmd_audit(args: argparse.Namespace, ctx: Context) -> int:
    doc = formats.loads(Path(args.building).read_text())
    if args.profile is not None:
        doc["profile"] = args.profile
    try:
        b = formats.building_from_json(doc)
    except MatchingInvalid as e:
        _emit({"ok": False, "violations": [{"rule": e.rule, "citation": str(e), "component_ids": []}]})
        return EXIT_CHECK
    r = audit_building(b)
    out = formats.report_to_json(r)
    if args.out_report:
        ctx.write("audit_report.json", formats.dumps(out))
    _emit(out)
    return EXIT_OK if r.ok else EXIT_CHECK


def cmd_capacity(args: argparse.Namespace, ctx: Context) -> int:
    cap = capacity_polydisk(args.a, args.b)
    doc: dict[str, Any] = {"a": args.a, "b": args.b, "capacity": area_text(cap), "capacity_value": float(cap)}
    if (args.r is None) != (args.s is None):
        raise UsageError("give both --r and --s")
    if args.r is not None:
        ob = embedding_obstruction(args.r, args.s, args.a, args.b)
        doc.update(
            {
                "r": args.r,
                "s": args.s,
                "obstructed": ob.obstructed,
                "reason": ob.reason,
                "a2": area_text(ob.a2),
                "a2_value": float(ob.a2),
            }
        )
    _emit(doc)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _global_flags(p: argparse.ArgumentParser, suppress: bool) -> None:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--out", default=d("laglink_out"), help="output directory for files")
    p.add_argument("--resolution", type=_resolution, default=d(256), help="grid resolution N (N x N)")
    p.add_argument("--tol", type=float, default=d(1e-6), help="tolerance on Lagrangian defects")
    p.add_argument("--plot", action="store_true", default=d(False), help="also write SVG projections")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="laglink", description="Lagrangian tori in R^4: constructions, invariants, linking, index audits.")
    _global_flags(p, suppress=False)
    common = _Parser(add_help=False)
    _global_flags(common, suppress=True)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("construct", parents=[common], help="build and validate a torus or the linked pair")
    csub = c.add_subparsers(dest="what", required=True, parser_class=_Parser)
    lp = csub.add_parser("linked-pair", parents=[common])
    lp.add_argument("--a2-1", type=_area_value, required=True, help="A2 of the larger torus")
    lp.add_argument("--a2-2", type=_area_value, required=True, help="A2 of the smaller torus")
    lp.add_argument("--alpha", type=float, default=10.0)
    lp.add_argument("--delta", type=float, default=None)
    for name in ("clifford", "chekanov"):
        q = csub.add_parser(name, parents=[common])
        q.add_argument("--r", type=float, required=True)

    i = sub.add_parser("invariants", parents=[common], help="lattice invariants of a torus")
    isub = i.add_subparsers(dest="what", required=True, parser_class=_Parser)
    q = isub.add_parser("product", parents=[common])
    q.add_argument("--r", required=True)
    q.add_argument("--s", required=True)
    for name in ("clifford", "chekanov"):
        isub.add_parser(name, parents=[common]).add_argument("--r", required=True)
    q = isub.add_parser("lattice", parents=[common])
    q.add_argument("--mu", required=True, help="m1,m2")
    q.add_argument("--omega", required=True, help="w1,w2 (e.g. pi,4*pi or 1.0,2.5)")
    isub.add_parser("file", parents=[common]).add_argument("file")

    v = sub.add_parser("verdict", parents=[common], help="unlinking verdict for a pair")
    v.add_argument("--l1", required=True, help="clifford:r | chekanov:r | product:r,s | descriptor.json")
    v.add_argument("--l2", required=True)
    v.add_argument("--pi1-trivial", choices=("yes", "no"), default=None)

    k = sub.add_parser("link", parents=[common], help="linking certificates and loop classes")
    k.add_argument("--a2-1", type=_area_value, default=None)
    k.add_argument("--a2-2", type=_area_value, default=None)
    k.add_argument("--loop", default=None, help="loop CSV (x1,y1,x2,y2)")
    k.add_argument("--torus", default="clifford:1")

    a = sub.add_parser("audit", parents=[common], help="audit a building JSON")
    a.add_argument("building")
    a.add_argument("--profile", choices=("two_torus", "sphere"), default=None)
    a.add_argument("--out-report", action="store_true", help="also write audit_report.json")

    cp = sub.add_parser("capacity", parents=[common], help="polydisk capacity and embedding obstruction")
    cp.add_argument("--a", required=True)
    cp.add_argument("--b", required=True, help="use inf for the cylinder")
    cp.add_argument("--r", default=None)
    cp.add_argument("--s", default=None)
    return p


COMMANDS: dict[str, Callable[[argparse.Namespace, Context], int]] = {
    "construct": cmd_construct,
    "invariants": cmd_invariants,
    "verdict": cmd_verdict,
    "link": cmd_link,
    "audit": cmd_audit,
    "capacity": cmd_capacity,
}


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.command == "capacity":
            args.b = math.inf if args.b in ("inf", "infinity") else args.b
        return COMMANDS[args.command](args, Context(args))
    except UsageError as e:
        print(f"laglink: {e}", file=sys.stderr)
        return EXIT_SCHEMA
    except SchemaError as e:
        print(f"laglink: schema error: {e}", file=sys.stderr)
        return EXIT_SCHEMA
    except (BadParams, Monotone) as e:
        print(f"laglink: check failed: {e}", file=sys.stderr)
        return EXIT_CHECK
    except LaglinkError as e:
        # numerical checks fail with 2; other precondition failures are bad input
        print(f"laglink: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_CHECK if isinstance(e, CHECK_ERRORS) else EXIT_SCHEMA
    except OSError as e:
        print(f"laglink: I/O error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
