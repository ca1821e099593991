"""Command-line front end.

Subcommands: ``generate`` (write a point cloud file), ``area`` and
``integrate`` (line-sampling estimates), ``audit`` (equidistribution checks
on an existing cloud), ``bench`` (quadrature complexity table).

Surfaces are specified by catalog name (sphere, torus, ellipsoid, plane,
tetrahedron, pyramid), by a field expression in x, y, z (the zero level set
is used), or by a mesh path (.off / .stl).  Exit codes: 0 ok, 1 usage or
input error, 2 numeric failure, 3 audit failure.

Set CROFTONCLOUD_THREADS=k to shard generation over k worker streams with
derived seeds (seed, seed+1, ...); shard outputs are concatenated in shard
order, so files depend only on the seed and configuration, never on timing.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__, cloudio, crofton, expr, meshio, samplers, stats, surfaces
from .rng import Pseudo, RejectionCapExceeded
from .samplers import ImplicitSamplerConfig, PointCloud, SurfaceNotFound

USAGE_ERROR = 1
NUMERIC_ERROR = 2
AUDIT_FAILURE = 3

_NUMERIC_ERRORS = (SurfaceNotFound, RejectionCapExceeded, FloatingPointError, np.linalg.LinAlgError)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="croftoncloud", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_surface_options(p, need_sampler=False):
        p.add_argument("--surface", required=True, help="catalog name, field expression, or mesh path")
        p.add_argument("--r", type=float, default=None, help="clip radius (default: per-surface)")
        p.add_argument("--seed", type=int, default=0, help="stream seed (default 0)")
        p.add_argument("--scan-steps", type=int, default=256, help="chord scan subintervals (default 256)")
        p.add_argument("--root-tol", type=float, default=1e-10, help="root parameter tolerance (default 1e-10)")
        p.add_argument(
            "--method",
            choices=["bisection", "regula-falsi"],
            default="bisection",
            help="bracket refinement method (default bisection)",
        )
        p.add_argument("--res", type=int, default=None, help="grid resolution for chart triangulation")
        if need_sampler:
            p.add_argument(
                "--sampler",
                choices=["crofton", "triangulated", "parametric", "axis-aligned"],
                default="crofton",
                help="cloud generator (default crofton)",
            )

    gen = sub.add_parser("generate", help="generate a point cloud file")
    add_surface_options(gen, need_sampler=True)
    gen.add_argument("--n", type=int, required=True, help="target point count")
    gen.add_argument("-o", "--output", required=True, help="output path (.xyz or .ply)")
    gen.add_argument(
        "--format",
        choices=["auto", "xyz", "ply", "ply-binary"],
        default="auto",
        help="output format (default: by extension, ascii ply)",
    )

    area = sub.add_parser("area", help="Monte Carlo area estimate")
    add_surface_options(area)
    area.add_argument("--m", type=int, required=True, help="number of sampled lines")

    integ = sub.add_parser("integrate", help="Monte Carlo surface integral")
    add_surface_options(integ)
    integ.add_argument("--m", type=int, required=True, help="number of sampled lines")
    integ.add_argument("--f", required=True, help="integrand expression in x, y, z")

    audit = sub.add_parser("audit", help="equidistribution audit of a cloud file")
    audit.add_argument("--cloud", required=True, help="cloud file path (.xyz or .ply)")
    audit.add_argument("--surface", default=None, help="catalog surface the cloud should cover")
    audit.add_argument("--records", default=None, help="write line-delimited JSON records here")

    bench = sub.add_parser("bench", help="quadrature complexity benchmark")
    bench.add_argument("--dims", type=int, default=6, help="cube dimension (default 6)")
    bench.add_argument(
        "--budgets",
        default="100,1000,10000,100000,1000000",
        help="comma-separated evaluation budgets",
    )
    bench.add_argument("--seeds", type=int, default=32, help="independent streams per budget (default 32)")
    bench.add_argument("--records", default=None, help="write line-delimited JSON records here")
    return parser


def _sampler_config(args) -> ImplicitSamplerConfig:
    return ImplicitSamplerConfig(
        scan_steps=args.scan_steps,
        root_tol=args.root_tol,
        method=args.method.replace("-", "_"),
    )


def _resolve_surface(spec: str, clip: float | None, res: int | None, prefer: str):
    """Build the surface object for *spec* in the *prefer* form.

    prefer: 'implicit', 'mesh', or 'chart'.  Catalog entries fall back to
    whatever forms they support; expressions always give implicit surfaces;
    paths always give meshes.
    """
    entry = surfaces.CATALOG.get(spec)
    if entry is not None:
        clip = entry.default_clip if clip is None else clip
        res_kw = {} if res is None else {"u_res": res, "v_res": res}
        if prefer == "implicit" and entry.implicit is not None:
            return entry.implicit(clip=clip), clip
        if prefer == "chart" and entry.chart is not None:
            return entry.chart(**res_kw), clip
        if prefer == "mesh":
            if entry.mesh is not None:
                return entry.mesh(), clip
            if entry.chart is not None:
                mesh, _ = surfaces.triangulate_parametric(entry.chart(**res_kw))
                return mesh, clip
        # fallbacks in a stable order
        for builder, kwargs in (
            (entry.implicit, {"clip": clip}),
            (entry.mesh, {}),
            (entry.chart, res_kw),
        ):
            if builder is not None:
                return builder(**kwargs), clip
        raise UsageError(f"catalog surface {spec!r} supports no usable form")
    if spec.lower().endswith((".off", ".stl")):
        if not os.path.exists(spec):
            raise UsageError(f"mesh file not found: {spec}")
        if prefer == "implicit":
            raise UsageError("mesh surfaces have no implicit form; use --sampler triangulated")
        return meshio.load_mesh(spec), clip
    try:
        field = expr.compile_field(spec)
    except expr.ExpressionError as err:
        raise UsageError(f"surface spec {spec!r} is neither a catalog name, a mesh path, nor a valid expression: {err}")
    if prefer != "implicit":
        raise UsageError("expression surfaces are implicit; use the crofton or axis-aligned sampler")
    clip = 2.0 if clip is None else clip
    return surfaces.ImplicitSurface(field, clip, name=spec), clip


def _shard_sizes(total: int, shards: int) -> list[int]:
    base, extra = divmod(total, shards)
    return [base + (1 if i < extra else 0) for i in range(shards)]


def _generate_cloud(args, config) -> PointCloud:
    threads = max(1, int(os.environ.get("CROFTONCLOUD_THREADS", "1")))
    prefer = {"crofton": "implicit", "axis-aligned": "implicit", "triangulated": "mesh", "parametric": "chart"}[
        args.sampler
    ]
    surface, clip = _resolve_surface(args.surface, args.r, args.res, prefer)

    def run_shard(seed: int, count: int) -> PointCloud:
        src = Pseudo(seed)
        if args.sampler == "crofton":
            return samplers.cloud_implicit(surface, src, count, config)
        if args.sampler == "axis-aligned":
            return samplers.cloud_axis_aligned(surface, src, count, config)
        if args.sampler == "triangulated":
            return samplers.cloud_triangulated(surface, src, count)
        return samplers.cloud_parametric(surface, src, count)

    if threads == 1:
        return run_shard(args.seed, args.n)
    sizes = _shard_sizes(args.n, threads)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        shards = list(pool.map(run_shard, [args.seed + i for i in range(threads)], sizes))
    positions = np.concatenate([c.positions for c in shards])
    normals = None
    if all(c.normals is not None for c in shards):
        normals = np.concatenate([c.normals for c in shards])
    merged = PointCloud(positions=positions, normals=normals)
    merged.lines_used = sum(c.lines_used for c in shards)
    return merged


def cmd_generate(args) -> int:
    config = _sampler_config(args)
    started = time.perf_counter()
    cloud = _generate_cloud(args, config)
    elapsed = time.perf_counter() - started
    meta = {
        "generator": f"croftoncloud {__version__}",
        "surface": args.surface,
        "sampler": args.sampler,
        "seed": args.seed,
        "n": args.n,
        "scan_steps": args.scan_steps,
        "root_tol": args.root_tol,
        "method": args.method,
        "threads": os.environ.get("CROFTONCLOUD_THREADS", "1"),
    }
    if args.r is not None:
        meta["r"] = args.r
    if args.res is not None:
        meta["res"] = args.res
    fmt = args.format
    binary = fmt == "ply-binary"
    if fmt == "ply-binary":
        fmt = "ply"
    cloudio.write_cloud(args.output, cloud.positions, cloud.normals, meta, fmt=fmt, binary=binary)
    print(f"points   {len(cloud)}")
    if cloud.lines_used:
        print(f"lines    {cloud.lines_used}")
        print(f"hits/line {cloud.mean_hits_per_line:.4f}")
    print(f"elapsed  {elapsed:.2f} s")
    print(f"wrote    {args.output}")
    return 0


def _print_estimate(label: str, estimate: crofton.CroftonEstimate) -> None:
    print(f"{label}  {estimate.value:.6f} +- {estimate.standard_error:.6f}")
    print(f"lines     {estimate.lines_used}")
    print(f"mean hits {estimate.mean_hits:.4f}")
    hist = " ".join(f"{k}:{c}" for k, c in sorted(estimate.hit_histogram.items()))
    print(f"hits histogram  {hist}")


def cmd_area(args) -> int:
    surface, clip = _resolve_surface(args.surface, args.r, args.res, "implicit")
    estimate = crofton.estimate_area(surface, Pseudo(args.seed), args.m, clip_radius=clip, config=_sampler_config(args))
    _print_estimate("area", estimate)
    return 0


def cmd_integrate(args) -> int:
    surface, clip = _resolve_surface(args.surface, args.r, args.res, "implicit")
    try:
        integrand = expr.compile_field(args.f)
    except expr.ExpressionError as err:
        raise UsageError(f"bad integrand: {err}")
    estimate = crofton.estimate_surface_integral(
        surface, integrand, Pseudo(args.seed), args.m, clip_radius=clip, config=_sampler_config(args)
    )
    _print_estimate("integral", estimate)
    return 0


def _audit_suites(name: str, positions: np.ndarray):
    """Region tests, uniform scalar, and density bins for a catalog surface."""
    if name == "sphere":
        tests = stats.sphere_region_tests()
        scalar = stats.sphere_unit_scalar(positions)
        # small caps around axis and diagonal directions expose the legacy
        # axis-aligned density defect; equal cap areas
        centers = []
        for sx in (1, -1):
            centers += [np.array([sx, 0.0, 0.0]), np.array([0.0, sx, 0.0]), np.array([0.0, 0.0, sx])]
        for sx in (1, -1):
            for sy in (1, -1):
                for sz in (1, -1):
                    centers.append(np.array([sx, sy, sz]) / np.sqrt(3.0))
        centers = np.array(centers)
        cosines = positions / np.linalg.norm(positions, axis=1, keepdims=True) @ centers.T
        best = np.argmax(cosines, axis=1)
        labels = np.where(cosines[np.arange(len(best)), best] > 0.95, best, -1)
        areas = np.full(len(centers), 1.0)
        return tests, scalar, labels, areas
    if name == "torus":
        tests = stats.torus_region_tests()
        scalar = stats.torus_angle_scalar(positions)
        angles = (np.arctan2(positions[:, 1], positions[:, 0]) / (2 * np.pi)) % 1.0
        labels = np.minimum((angles * 8).astype(int), 7)
        return tests, scalar, labels, np.full(8, 1.0)
    entry = surfaces.CATALOG.get(name)
    if entry is not None and entry.mesh is not None:
        mesh = entry.mesh()
        tests = stats.mesh_face_region_tests(mesh)
        from .stats import mesh_cumulative_scalar

        normals_ = surfaces.triangle_normal(mesh.triangles)
        offsets = np.einsum("ij,ij->i", normals_, mesh.triangles[:, 0])
        labels = np.argmin(np.abs(positions @ normals_.T - offsets[None, :]), axis=1)
        scalar = mesh_cumulative_scalar(positions, labels, mesh)
        return tests, scalar, labels, mesh.areas
    raise UsageError(f"no audit suite for surface {name!r}; supported: sphere, torus, mesh catalog entries")


DENSITY_RATIO_GATE = 1.15


def cmd_audit(args) -> int:
    positions, normals, meta = cloudio.read_cloud(args.cloud)
    records: list[dict] = []
    lines: list[str] = []
    failed = False
    lines.append(f"cloud {args.cloud}: {len(positions)} points, meta {meta or '{}'}")
    if not len(positions):
        print("\n".join(lines))
        print("audit: FAIL (empty cloud)")
        return AUDIT_FAILURE
    finite = bool(np.isfinite(positions).all())
    lines.append(f"finite coordinates: {'pass' if finite else 'FAIL'}")
    failed |= not finite
    if normals is not None:
        unit = bool(np.allclose(np.linalg.norm(normals, axis=1), 1.0, atol=1e-6))
        lines.append(f"unit normals: {'pass' if unit else 'FAIL'}")
        failed |= not unit
    if args.surface is not None:
        tests, scalar, labels, areas = _audit_suites(args.surface, positions)
        for result in stats.region_test(positions, tests):
            lines.append(result.line())
            records.append(result.record())
            failed |= not result.passed
        ktuple = stats.ktuple_test(scalar, k=2, grid=8)
        lines.append(ktuple.line())
        records.append(ktuple.record())
        failed |= not ktuple.passed
        share = areas / areas.sum()
        labeled = int((labels >= 0).sum())
        if labeled * share.min() < 100:
            lines.append("density: skipped (fewer than 100 expected points per bin; generate more points)")
        else:
            try:
                density = stats.density_variation(labels, areas)
            except ValueError as err:
                lines.append(f"density: FAIL ({err})")
                failed = True
            else:
                # fail only on a ratio both large and statistically solid
                ok = density.ratio - 3.0 * density.ratio_stderr <= DENSITY_RATIO_GATE
                lines.append(density.line() + ("  [pass]" if ok else "  [FAIL]"))
                records.append(density.record())
                failed |= not ok
    print("\n".join(lines))
    if args.records:
        with open(args.records, "w", encoding="utf-8") as fh:
            for record in records:
                fh.write(json.dumps(record) + "\n")
    print(f"audit: {'FAIL' if failed else 'pass'}")
    return AUDIT_FAILURE if failed else 0


def cmd_bench(args) -> int:
    budgets = [int(b) for b in args.budgets.split(",") if b]

    def integrand(pts):
        return np.cos(pts).prod(axis=-1)

    truth = float(np.sin(1.0) ** args.dims)
    table = stats.curse_benchmark(integrand, args.dims, truth, budgets=budgets, n_seeds=args.seeds)
    print(f"integrand prod(cos(x_i)) on the {args.dims}-cube, integral {truth:.6f}")
    for line in table.lines():
        print(line)
    mc = [(r.evaluations, r.error) for r in table.by_method("mc")]
    slope = stats.loglog_slope(mc)
    print(f"mc log-error slope: {slope:.3f} (dimension-free -1/2 expected)")
    if args.records:
        with open(args.records, "w", encoding="utf-8") as fh:
            for row in table.rows:
                fh.write(json.dumps(row.record()) + "\n")
            fh.write(json.dumps({"mc_slope": slope}) + "\n")
    return 0


_HANDLERS = {
    "generate": cmd_generate,
    "area": cmd_area,
    "integrate": cmd_integrate,
    "audit": cmd_audit,
    "bench": cmd_bench,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as err:
        print(f"error: {err}", file=sys.stderr)
        return USAGE_ERROR
    try:
        return _HANDLERS[args.command](args)
    except UsageError as err:
        print(f"error: {err}", file=sys.stderr)
        return USAGE_ERROR
    except (OSError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return USAGE_ERROR
    except _NUMERIC_ERRORS as err:
        print(f"numeric failure: {err}", file=sys.stderr)
        return NUMERIC_ERROR


if __name__ == "__main__":
    sys.exit(main())
