"""Command line entry point.

::

    vexlap solve --config c.toml
    vexlap capacity --set E.pgm --box D.pgm [--exponent "constant(2)"] [--resolution 64]
    vexlap distance a.pgm b.pgm
    vexlap experiment sverak|capcond|cm|indep|alpha --config c.toml --out dir/

Exit status: 0 when every assertion passed, 2 when an assertion failed,
1 on errors (bad input, non-convergence, ...).

``solve`` config keys (TOML): ``box`` (default unit square), ``resolution``
(mesh cells per unit length), ``mask_resolution`` (pixels per unit, default
``resolution``), ``domain`` (shape descriptor such as ``disk(0.5, 0.5, 0.4)``)
or ``mask`` (path to a ``.pgm``/``.json`` mask, relative to the config
file), ``exponent`` (``constant(c)``, ``affine(a, b, c)``, ``radial(a, b)``),
``source`` (``constant``, ``bump``, ``sines``, ``affine``, ``dx``, ``dy``,
``sum``), ``out`` (output directory) and an optional ``[solver]`` table with
``tol``, ``max_iter``, ``eps_schedule`` and ``boundary`` (``"pin"`` or
``"fit"``).  See ``vexlap.experiments.ExperimentConfig`` for experiment keys.
"""
import argparse
import os
import sys

from . import io
from .errors import VexlapError
from .experiments import KINDS, ExperimentConfig, make_source, run, tomllib
from .exponent import make_exponent
from .geometry import RasterDomain, complement_components, hausdorff_complementary_distance, shape_from_descriptor
from .mesh import build_mesh
from .solver import SolverOptions, solve_dirichlet


def _load_toml(path):
    with open(path, "rb") as fh:
        return tomllib.load(fh)


def cmd_solve(args):
    cfg = _load_toml(args.config)
    box = tuple(float(b) for b in cfg.get("box", (0.0, 0.0, 1.0, 1.0)))
    res = int(cfg.get("resolution", 64))
    mres = int(cfg.get("mask_resolution", res))
    if "mask" in cfg:
        path = os.path.join(os.path.dirname(os.path.abspath(args.config)), cfg["mask"])
        domain = io.read_mask(path)
        box = domain.box
    else:
        domain = RasterDomain.from_shape(shape_from_descriptor(cfg.get("domain", "full")), box, mres)
    mesh = build_mesh(box, res)
    p = make_exponent(cfg.get("exponent", "constant(2)"), mesh)
    f = make_source(cfg.get("source", "constant(1)"), mesh)
    opts = SolverOptions.from_dict(cfg.get("solver", {}))
    u, rep = solve_dirichlet(domain, f, p, opts)
    out = args.out or cfg.get("out") or "."
    os.makedirs(out, exist_ok=True)
    io.write_gridfunction_csv(u, os.path.join(out, "solution.csv"))
    io.write_gridfunction_vtk(u, os.path.join(out, "solution.vtk"))
    io.write_json({"converged": rep.converged, "solver": rep.to_dict()}, os.path.join(out, "report.json"))
    print(f"iterations={rep.iterations} energy={rep.final_energy:.10g} converged={rep.converged}")
    return 0 if rep.converged else 2


def cmd_capacity(args):
    from .capacity import relative_capacity
    e = io.read_mask(args.set)
    d = io.read_mask(args.box)
    res = args.resolution or int(round(d.resolution))
    mesh = build_mesh(d.box, res)
    p = make_exponent(args.exponent, mesh)
    r = relative_capacity(e, d, p, mesh)
    print(f"capacity={r.value:.12g} converged={r.converged}")
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        io.write_json(r.to_dict(), os.path.join(args.out, "report.json"))
        io.write_gridfunction_vtk(r.potential, os.path.join(args.out, "potential.vtk"), name="potential")
    return 0 if r.converged else 2


def cmd_distance(args):
    a, b = io.read_mask(args.a), io.read_mask(args.b)
    d = hausdorff_complementary_distance(a, b)
    print(f"dH={float(d):.12g} components_a={complement_components(a)} components_b={complement_components(b)}")
    return 0


def cmd_experiment(args):
    cfg = ExperimentConfig.from_toml(args.config, kind=args.kind)
    out = args.out or cfg.out or "."
    os.makedirs(out, exist_ok=True)
    table = run(cfg)
    table.to_csv(os.path.join(out, "table.csv"))
    report = table.report()
    io.write_json(report, os.path.join(out, "report.json"))
    for name, ok in report["assertions"].items():
        print(f"{'PASS' if ok else 'FAIL'} {name}")
    return 0 if table.passed else 2


def build_parser():
    ap = argparse.ArgumentParser(prog="vexlap", description=__doc__.split("\n\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="solve one Dirichlet problem")
    s.add_argument("--config", required=True)
    s.add_argument("--out")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("capacity", help="relative capacity of a set inside an open set")
    s.add_argument("--set", required=True, help="mask of the compact set E")
    s.add_argument("--box", required=True, help="mask of the open set D")
    s.add_argument("--exponent", default="constant(2)")
    s.add_argument("--resolution", type=int, help="mesh cells per unit (default: mask resolution)")
    s.add_argument("--out")
    s.set_defaults(func=cmd_capacity)

    s = sub.add_parser("distance", help="Hausdorff complementary distance of two masks")
    s.add_argument("a")
    s.add_argument("b")
    s.set_defaults(func=cmd_distance)

    s = sub.add_parser("experiment", help="run a convergence experiment")
    s.add_argument("kind", choices=KINDS)
    s.add_argument("--config", required=True)
    s.add_argument("--out")
    s.set_defaults(func=cmd_experiment)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (VexlapError, ValueError, OSError) as exc:
        print(f"vexlap: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
