"""Command-line front end.

Subcommands
-----------
mesh       write ``<id>.json`` and ``<id>.vtk`` for one generated mesh
validate   report the largest level jump between neighbours of a JSON mesh
patchtest  patch-test errors, one CSV row per (mesh, treatment)
poisson    convergence study for the manufactured Poisson problem
compare    patch-test errors in wide form, one column per treatment

Exit status: 0 on success, 1 on a runtime failure, 2 on a usage error.
"""
import argparse
import csv
import io
import logging
import os
import sys

from . import export
from .errors import QtfemError, TreatmentNotApplicableError
from .mesh import GENERATORS, generate_mesh, mesh_id, refine_uniformly
from .solver import (TREATMENT_NAMES, make_treatment, run_patch_test,
                     run_poisson_convergence)

log = logging.getLogger("qtfem")

CSV_COLUMNS = ("mesh_id", "generator", "depth", "balanced", "treatment", "n_dof",
               "rel_l2_error", "slope")
MISSING = "-"


class UsageError(Exception):
    pass


def _fmt(x):
    return f"{x:.6e}"


def _treatments(values):
    if not values:
        raise UsageError("at least one --treatment is required")
    out = []
    for v in values:
        for name in v.split(","):
            name = name.strip()
            if not name:
                raise UsageError("empty treatment name")
            names = TREATMENT_NAMES if name == "all" else (name,)
            for n in names:
                if n not in TREATMENT_NAMES:
                    raise UsageError(f"unknown treatment {n!r}; choose from "
                                     f"{', '.join(TREATMENT_NAMES)} or all")
                if n not in out:
                    out.append(n)
    return out


def _depths(args):
    depths = args.depth or [args.default_depth]
    if any(d < 0 for d in depths):
        raise UsageError("--depth must be >= 0")
    return depths


def _meshes(args):
    """(label, generator, depth, mesh) for every requested level."""
    refine = getattr(args, "refine", 0) or 0
    if refine < 0:
        raise UsageError("--refine must be >= 0")
    if refine and len(args.depth or []) > 1:
        raise UsageError("--refine takes a single --depth")
    out = []
    for d in _depths(args):
        mesh = generate_mesh(args.gen, d, balance=args.balance, base=args.base)
        label = mesh_id(args.gen, d, args.balance, args.base)
        for j in range(refine + 1):
            m = refine_uniformly(mesh, j) if j else mesh
            out.append((label + (f"-r{j}" if j else ""), d, m))
    return out


def _emit(args, rows, header):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    text = buf.getvalue()
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        export.atomic_write_text(args.out, text)
        log.info("wrote %s", args.out)


def _check_out(path):
    # fail before any computation when the destination cannot exist
    if path not in (None, "-"):
        directory = os.path.dirname(os.path.abspath(path))
        if not os.path.isdir(directory):
            raise FileNotFoundError(f"output directory does not exist: {directory}")


def cmd_mesh(args):
    if len(args.depth or []) > 1:
        raise UsageError("mesh takes a single --depth")
    out_dir = args.out or "."
    if not os.path.isdir(out_dir):
        raise FileNotFoundError(f"output directory does not exist: {out_dir}")
    d = _depths(args)[0]
    mesh = generate_mesh(args.gen, d, balance=args.balance, base=args.base)
    label = mesh_id(args.gen, d, args.balance, args.base)
    stem = os.path.join(out_dir, label)
    export.write_json(mesh, stem + ".json")
    export.write_vtk(mesh, stem + ".vtk")
    print(f"{label}: {mesh.n_leaves} polygons, {mesh.n_nodes} nodes, "
          f"{len(mesh.hanging)} hanging, max level jump "
          f"{mesh.max_adjacent_level_difference()} -> {stem}.json, {stem}.vtk")
    return 0


def cmd_validate(args):
    mesh = export.read_json(args.mesh)
    jump = mesh.max_adjacent_level_difference()
    ok = jump <= 1
    print(f"leaves={mesh.n_leaves} nodes={mesh.n_nodes} hanging={len(mesh.hanging)} "
          f"max_level_difference={jump} two_to_one={'yes' if ok else 'no'}")
    if args.require_balanced and not ok:
        return 1
    return 0


def _patch_rows(args, treatments):
    rows = []
    for label, d, mesh in _meshes(args):
        for name in treatments:
            try:
                rep = run_patch_test(args.case, mesh, make_treatment(name), label)
            except TreatmentNotApplicableError as exc:
                log.info("%s on %s: %s", name, label, exc)
                rows.append((label, d, mesh, name, None))
                continue
            log.info("%s %s case %s: %.3e", label, name, args.case, rep.rel_l2_error)
            rows.append((label, d, mesh, name, rep))
    return rows


def cmd_patchtest(args):
    treatments = _treatments(args.treatment)
    _check_out(args.out)
    rows = []
    for label, d, mesh, name, rep in _patch_rows(args, treatments):
        err = MISSING if rep is None else _fmt(rep.rel_l2_error)
        ndof = MISSING if rep is None else rep.n_dof
        rows.append((label, args.gen, d, int(mesh.balanced), name, ndof, err, ""))
    _emit(args, rows, CSV_COLUMNS)
    return 0


def cmd_compare(args):
    treatments = _treatments(args.treatment)
    _check_out(args.out)
    table = {}
    for label, d, mesh, name, rep in _patch_rows(args, treatments):
        row = table.setdefault(label, [label, args.gen, d, int(mesh.balanced), mesh.n_nodes])
        row.append(MISSING if rep is None else _fmt(rep.rel_l2_error))
    header = ("mesh_id", "generator", "depth", "balanced", "n_dof") + tuple(treatments)
    _emit(args, list(table.values()), header)
    return 0


def cmd_poisson(args):
    treatments = _treatments(args.treatment)
    _check_out(args.out)
    levels = _meshes(args)
    labels = [lab for lab, _, _ in levels]
    meshes = [m for _, _, m in levels]
    rows = []
    for name in treatments:
        tr = make_treatment(name)
        try:
            reports, slope = run_poisson_convergence(meshes, tr, labels)
        except TreatmentNotApplicableError as exc:
            log.info("%s: %s", name, exc)
            for lab, d, m in levels:
                rows.append((lab, args.gen, d, int(m.balanced), name, MISSING, MISSING, MISSING))
            continue
        slope_txt = _fmt(slope) if len(reports) >= 2 else ""
        for (lab, d, m), rep in zip(levels, reports):
            rows.append((lab, args.gen, d, int(m.balanced), name, rep.n_dof,
                         _fmt(rep.rel_l2_error), slope_txt))
        log.info("%s slope %.3f", name, slope)
    _emit(args, rows, CSV_COLUMNS)
    return 0


def _add_mesh_args(p, default_depth):
    p.add_argument("--gen", choices=GENERATORS, default="uniform", help="mesh generator")
    p.add_argument("--depth", type=int, action="append",
                   help=f"generator depth; repeat for several meshes (default {default_depth})")
    p.add_argument("--base", type=int, default=None,
                   help="uniform base level before the generator refines (generator default)")
    p.add_argument("--balance", action=argparse.BooleanOptionalAction, default=True,
                   help="enforce the 2:1 rule (default on)")
    p.set_defaults(default_depth=default_depth)


def _add_run_args(p):
    p.add_argument("--treatment", action="append",
                   help=f"one of {', '.join(TREATMENT_NAMES)} or all; repeatable")
    p.add_argument("--out", help="CSV output path (default stdout)")


def build_parser():
    parser = argparse.ArgumentParser(prog="qtfem", description=__doc__.split("\n\n")[0])
    parser.add_argument("--log", help="write solver diagnostics to this file")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug-level logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mesh", help="generate and export a mesh")
    _add_mesh_args(p, 2)
    p.add_argument("--out", help="output directory (default: current directory)")
    p.set_defaults(func=cmd_mesh)

    p = sub.add_parser("validate", help="check the 2:1 rule of a JSON mesh")
    p.add_argument("mesh", help="mesh JSON file")
    p.add_argument("--require-balanced", action="store_true",
                   help="exit 1 when some neighbours differ by more than one level")
    p.set_defaults(func=cmd_validate)

    for name, func, helptext in (("patchtest", cmd_patchtest, "patch-test errors (long form)"),
                                 ("compare", cmd_compare, "patch-test errors (wide form)")):
        p = sub.add_parser(name, help=helptext)
        _add_mesh_args(p, 2)
        _add_run_args(p)
        p.add_argument("--case", choices=("A", "B"), default="A",
                       help="A: g = x + y, B: quadratic g")
        p.set_defaults(func=func)

    p = sub.add_parser("poisson", help="Poisson convergence study")
    _add_mesh_args(p, 2)
    _add_run_args(p)
    p.add_argument("--refine", type=int, default=0,
                   help="append this many uniform refinements of the (single) mesh")
    p.set_defaults(func=cmd_poisson)
    return parser


def _configure_logging(args):
    level = logging.DEBUG if args.verbose else logging.INFO
    root = logging.getLogger("qtfem")
    root.setLevel(level)
    if args.log:
        handler = logging.FileHandler(args.log, mode="w")
        handler.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(name)s: %(message)s"))
        root.addHandler(handler)
        return handler
    return None


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        handler = _configure_logging(args)
    except OSError as exc:
        print(f"qtfem: error: cannot open log file: {exc}", file=sys.stderr)
        return 1
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"qtfem: error: {exc}", file=sys.stderr)
        return 2
    except (QtfemError, OSError, ValueError) as exc:
        log.error("%s", exc)
        print(f"qtfem: error: {exc}", file=sys.stderr)
        return 1
    finally:
        if handler is not None:
            logging.getLogger("qtfem").removeHandler(handler)
            handler.close()


if __name__ == "__main__":
    sys.exit(main())
