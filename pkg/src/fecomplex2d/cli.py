"""Command line front end.

Exit status: 0 when every check passed, 1 when a mathematical check failed,
2 for invalid input or parameters.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from typing import Sequence

from .bernstein import REFERENCE_TRIANGLE, TriangleGeom
from .complexes import (KINDS, ComplexSpec, check_poly_identity, derham_grid, derham_table_row,
                        poly_identity, verify_bubble_complex, verify_complex)
from .elements import (FAMILIES, FAMILY_ALIASES, TEST_TRIANGLES, ElementSpec, build_dofs,
                       check_unisolvence)
from .errors import FecError, InclusionError
from .lattice import SmoothnessPair
from .mesh import resolve

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class _InputError(Exception):
    pass


def _pair(text: str) -> SmoothnessPair:
    try:
        return SmoothnessPair.parse(text)
    except (ValueError, FecError) as exc:
        raise argparse.ArgumentTypeError(f"expected a pair 'v,e', got {text!r}") from exc


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fecomplex2d", description="Exact checks for smooth finite elements and complexes.")
    sub = p.add_subparsers(dest="verb", required=True)

    def common(sp):
        sp.add_argument("--format", choices=("json", "table"), default="json")
        sp.add_argument("--strict", action="store_true", help="treat bound warnings as failures")

    sp = sub.add_parser("identity", help="polynomial de Rham identity and per entity table rows")
    sp.add_argument("--k-max", type=int, default=20)
    sp.add_argument("--table-k-max", type=int, default=0, help="also check table rows up to this k")
    common(sp)

    sp = sub.add_parser("unisolvence", help="DoF matrix rank of one element")
    sp.add_argument("--family", required=True, choices=sorted(set(FAMILIES) | set(FAMILY_ALIASES)))
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--rv", type=int)
    sp.add_argument("--re", type=int)
    sp.add_argument("--r1", type=_pair)
    sp.add_argument("--r2", type=_pair)
    sp.add_argument("--triangle", default="ref", help="ref, random or a mesh file whose triangles are used")
    common(sp)

    sp = sub.add_parser("complex", help="exactness verdict of a finite element complex")
    sp.add_argument("--kind", required=True, choices=KINDS)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--r0", type=_pair, help="must equal r1 + 1 when given")
    sp.add_argument("--r1", type=_pair, required=True)
    sp.add_argument("--r2", type=_pair, default=SmoothnessPair(-1, -1))
    sp.add_argument("--r3", type=_pair)
    sp.add_argument("--mesh", default="builtin:square-diagonal-1")
    sp.add_argument("--rotated", action="store_true", help="verify the rotated chain")
    common(sp)

    sp = sub.add_parser("catalog", help="named elements with their DoF counts")
    common(sp)

    sp = sub.add_parser("mesh-info", help="entity counts and topology of a mesh")
    sp.add_argument("--mesh", required=True)
    common(sp)
    return p


# ---------------------------------------------------------------- verbs

def _identity(a) -> tuple[dict, list[str], list[str]]:
    if a.k_max < 1:
        raise _InputError("--k-max must be at least 1")
    rows = {str(k): poly_identity(k) for k in range(1, a.k_max + 1)}
    failed = [] if check_poly_identity(a.k_max) else ["polynomial_identity"]
    report: dict = {"verb": "identity", "k_max": a.k_max, "alternating_sums": rows}
    if a.table_k_max:
        table = [{"k": k, "r1": list(r1.as_tuple()), "r2": list(r2.as_tuple()),
                  "row": list(derham_table_row(k, r1, r2))} for k, r1, r2 in derham_grid(a.table_k_max)]
        report["table_rows"] = table
        if any(t["row"] != [1, -1, 1] for t in table):
            failed.append("table_rows")
    report["passed"] = not failed
    return report, failed, []


def _spec_from_args(a) -> ElementSpec:
    fam = FAMILY_ALIASES.get(a.family, a.family)
    if a.r1 is not None:
        r1 = a.r1
    elif a.rv is not None and a.re is not None:
        r1 = SmoothnessPair(a.rv, a.re)
    else:
        raise _InputError("give --rv and --re, or --r1")
    if a.r1 is not None and (a.rv is not None or a.re is not None):
        raise _InputError("--rv/--re and --r1 are exclusive")
    r2 = a.r2 if a.r2 is not None else SmoothnessPair(-1, -1)
    return ElementSpec(fam, a.k, r1, r2)


def _triangles(choice: str) -> list[tuple[str, TriangleGeom]]:
    if choice == "ref":
        return [("ref", REFERENCE_TRIANGLE)]
    if choice == "random":
        return [(f"random{i}", t) for i, t in enumerate(TEST_TRIANGLES)]
    m = resolve(choice)
    return [(f"cell{c}", m.geometry(c)) for c in range(m.n_triangles)]


def _unisolvence(a) -> tuple[dict, list[str], list[str]]:
    spec = _spec_from_args(a)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        dofs = build_dofs(spec)
    results = []
    failed = []
    for name, geom in _triangles(a.triangle):
        v = check_unisolvence(dofs, geom)
        status = "nonsingular" if v.nonsingular else "singular"
        results.append({"triangle": name, "vertices": [[str(x), str(y)] for x, y in geom.vertices],
                        "summary": f"{v.rows}x{v.cols} {status}", **v.as_dict()})
        if not v.nonsingular:
            failed.append(f"unisolvence[{name}]")
    report = {"verb": "unisolvence", "spec": spec.echo(), "counts": dict(zip(
        ("per_vertex", "per_edge", "per_triangle"), dofs.counts())),
        "functionals": len(dofs), "labels": dofs.label_counts(), "results": results,
        "warnings": list(dofs.warnings), "passed": not failed}
    return report, failed, list(dofs.warnings)


def _complex(a) -> tuple[dict, list[str], list[str]]:
    if a.r0 is not None and a.r0 != a.r1.shift(1):
        raise _InputError(f"--r0 must equal r1 + 1 = {a.r1.shift(1)}")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        if a.kind == "bubble":
            v = verify_bubble_complex(a.k, a.r1, a.r2)
        else:
            mesh = resolve(a.mesh)
            cs = ComplexSpec(a.kind, a.k, a.r1, a.r2, a.r3)
            v = verify_complex(cs, mesh, rotated=a.rotated)
            v.spec["mesh_name"] = a.mesh
    report = {"verb": "complex", **v.as_dict(), "passed": v.passed}
    failed = v.failed_checks() if v.exact is not None else (["a_zero_compositions"] if not v.is_complex else [])
    return report, failed, list(v.warnings)


CATALOG = (
    ("Lagrange P1", "scalar_smooth", 1, (0, 0), (-1, -1)),
    ("Hermite", "scalar_smooth", 3, (1, 0), (-1, -1)),
    ("Argyris", "scalar_smooth", 5, (2, 1), (-1, -1)),
    ("Bramble-Zlamal m=2", "scalar_smooth", 9, (4, 2), (-1, -1)),
    ("smooth div (C1 vertices)", "vector_div", 4, (1, 0), (0, -1)),
    ("BDM1", "vector_div_tn", 1, (-1, -1), (-1, -1)),
    ("Stenberg", "vector_div_tn", 2, (0, -1), (-1, -1)),
    ("Hu-Zhang", "sym_div", 3, (0, -1), (-1, -1)),
    ("divdiv plus (matrix)", "matrix_divdiv_plus", 7, (2, 0), (0, 0)),
    ("divdiv plus, r1^e = -1", "sym_divdiv_plus", 3, (0, -1), (-1, -1)),
    ("divdiv relaxed", "sym_divdiv_relaxed", 3, (0, -1), (-1, -1)),
)


def _catalog(a) -> tuple[dict, list[str], list[str]]:
    rows = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for name, fam, k, r1, r2 in CATALOG:
            spec = ElementSpec(fam, k, r1, r2)
            try:
                d = build_dofs(spec)
            except FecError as exc:
                # kept in the listing so the obstruction stays visible
                rows.append({"name": name, "spec": spec.echo(), "dim": spec.space_dim, "error": str(exc)})
                continue
            rows.append({"name": name, "spec": spec.echo(), "dim": spec.space_dim,
                         "per_vertex": d.counts()[0], "per_edge": d.counts()[1], "per_triangle": d.counts()[2]})
    report = {"verb": "catalog", "families": list(FAMILIES), "complex_kinds": list(KINDS),
              "builtin_meshes": ["builtin:square-diagonal-N", "builtin:square-crisscross-N",
                                 "builtin:reference-triangle", "builtin:annulus"],
              "elements": rows, "passed": True}
    return report, [], []


def _mesh_info(a) -> tuple[dict, list[str], list[str]]:
    m = resolve(a.mesh)
    report = {"verb": "mesh-info", "mesh": a.mesh, **m.info(), "passed": True}
    return report, [], []


_VERBS = {"identity": _identity, "unisolvence": _unisolvence, "complex": _complex,
          "catalog": _catalog, "mesh-info": _mesh_info}


# ---------------------------------------------------------------- output

def _table(report: dict) -> str:
    lines = []

    def walk(prefix: str, value):
        if isinstance(value, dict):
            for k in sorted(value):
                walk(f"{prefix}.{k}" if prefix else str(k), value[k])
        elif isinstance(value, list) and value and isinstance(value[0], dict):
            for i, item in enumerate(value):
                walk(f"{prefix}[{i}]", item)
        else:
            lines.append(f"{prefix:<40} {json.dumps(value, sort_keys=True)}")

    walk("", report)
    return "\n".join(lines)


def render(report: dict, fmt: str) -> str:
    if fmt == "table":
        return _table(report)
    return json.dumps(report, sort_keys=True, indent=2)


_PAIR_FLAGS = ("--r0", "--r1", "--r2", "--r3")


def _join_negative_pairs(argv: Sequence[str]) -> list[str]:
    """``--r1 -1,-1`` would be read as two flags by argparse; glue such values to their flag."""
    out: list[str] = []
    it = iter(argv)
    for tok in it:
        if tok in _PAIR_FLAGS:
            nxt = next(it, None)
            if nxt is None:
                out.append(tok)
            elif nxt.startswith("-") and nxt[1:2].isdigit():
                out.append(f"{tok}={nxt}")
            else:
                out += [tok, nxt]
        else:
            out.append(tok)
    return out


def run(argv: Sequence[str] | None = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    argv = _join_negative_pairs(sys.argv[1:] if argv is None else argv)
    try:
        a = _parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        report, failed, notes = _VERBS[a.verb](a)
    except _InputError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_INPUT
    except InclusionError as exc:
        print(f"check failed: inclusion: {exc}", file=err)
        return EXIT_FAIL
    except FecError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=err)
        return EXIT_INPUT
    if a.strict and notes:
        failed = failed + ["strict_warnings"]
        report["passed"] = False
    print(render(report, a.format), file=out)
    if failed:
        print("check failed: " + ", ".join(failed), file=err)
        return EXIT_FAIL
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
