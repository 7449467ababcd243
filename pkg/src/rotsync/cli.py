"""Experiment harness: generate instances, run solves, sweep parameters,
compare initializers, verify against the oracles, and emit plot data.

Exit codes: 0 success, 1 numerical or data failure, 2 usage error, 3 IO error.
Every command is deterministic given its flags and seeds.
"""

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from . import model, oracles, rotgroup, solver
from .spectrin import leading_eigenpairs, naive_spectrin, spectrin
from .errors import InvalidParams, NonSmoothPoint, ParseError, RotsyncError

EXIT_OK = 0
EXIT_NUMERICAL = 1
EXIT_USAGE = 2
EXIT_IO = 3

AGGREGATE_COLUMNS = (
    "param_name",
    "param_value",
    "sigma",
    "mean_final_dist",
    "std_final_dist",
    "mean_iters",
    "seeds",
)

INIT_CHOICES = ("spectral", "naive-spectral", "random", "ground-truth")
SUITE_NAMES = ("procrustes-grid", "finite-difference", "spectrum", "haar-stats", "weak-sharpness")

# Offset separating the instance RNG stream from the random-init stream.
_INIT_SEED_OFFSET = 1_000_000_007


def _add_model_args(p):
    p.add_argument("--n", type=int, default=200, help="number of nodes")
    p.add_argument("--d", type=int, default=3, help="rotation dimension")
    p.add_argument("--p", type=float, default=None, help="true-observation ratio (default 1)")
    p.add_argument("--q", type=float, default=None, help="observation ratio (default 1)")
    p.add_argument("--sigma", type=float, default=None, help="additive noise level (default 0)")
    p.add_argument("--seed", type=int, default=0, help="base RNG seed")
    p.add_argument(
        "--pq-rule",
        choices=["log-cube"],
        default=None,
        help="set p = q = (log n / n)^(1/3), overriding --p/--q",
    )


def _add_solver_args(p):
    p.add_argument("--mu0", type=float, default=None, help="initial step (default 1/(n p q))")
    p.add_argument("--gamma", type=float, default=0.95, help="geometric step decay")
    p.add_argument("--max-iters", type=int, default=500)
    p.add_argument("--step-floor", type=float, default=1e-16)


def _params_from_args(args, seed):
    if args.pq_rule == "log-cube":
        p = q = model.log_cube_ratio(args.n)
    else:
        p = args.p if args.p is not None else 1.0
        q = args.q if args.q is not None else 1.0
    sigma = args.sigma if args.sigma is not None else 0.0
    return model.RcmParams(n=args.n, d=args.d, p=p, q=q, sigma=sigma, seed=seed)


def _solver_config(args, params):
    mu0 = args.mu0
    if mu0 is None:
        mu0 = solver.default_mu0(params.n, params.p, params.q)
    return solver.SolverConfig(
        mu0=mu0, gamma=args.gamma, max_iters=args.max_iters, step_floor=args.step_floor
    )


def _initial_stack(kind, inst, seed):
    graph = inst.graph
    if kind == "ground-truth":
        return inst.ground_truth.copy()
    if kind == "random":
        rng = np.random.default_rng(_INIT_SEED_OFFSET + seed)
        return rotgroup.random_rotation(graph.d, rng, size=graph.n)
    Y = model.dense_data_matrix(graph)
    if kind == "naive-spectral":
        return naive_spectrin(Y, graph.n, graph.d)
    return spectrin(Y, graph.n, graph.d)


def _write_aggregate(path, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(AGGREGATE_COLUMNS)
        for row in rows:
            writer.writerow(row)


def _aggregate_row(param_name, param_value, sigma, finals, iter_counts):
    finals = [x for x in finals if x is not None]
    if finals:
        mean = format(float(np.mean(finals)), ".17g")
        std = format(float(np.std(finals)), ".17g")
        mean_iters = format(float(np.mean(iter_counts)), ".17g")
    else:
        mean = std = mean_iters = "nan"
    return (
        param_name,
        format(float(param_value), ".17g"),
        format(float(sigma), ".17g"),
        mean,
        std,
        mean_iters,
        str(len(finals)),
    )


def cmd_generate(args):
    params = _params_from_args(args, args.seed)
    inst = model.generate_instance(params)
    model.save_instance(inst, args.out)
    labels = inst.graph.label_array()
    outliers = int(np.sum(~labels)) if labels is not None else 0
    print(
        f"wrote {args.out}: n={params.n} d={params.d} "
        f"edges={inst.graph.num_edges} outliers={outliers}"
    )
    return EXIT_OK


def cmd_run(args):
    out_stem = Path(args.out)
    out_stem.parent.mkdir(parents=True, exist_ok=True)
    loaded = model.load_instance(args.in_path) if args.in_path else None

    finals, iter_counts = [], []
    sigma = n_val = None
    for t in range(args.repeats):
        seed = args.seed + t
        inst = loaded if loaded is not None else model.generate_instance(_params_from_args(args, seed))
        sigma, n_val = inst.params.sigma, inst.params.n
        config = _solver_config(args, inst.params)
        X0 = _initial_stack(args.init, inst, seed)
        X, trace = solver.resync_run(inst.graph, config, X0, inst.ground_truth)
        trace.write_csv(f"{out_stem}_trace_seed{seed}.csv")
        model.save_stack(X, f"{out_stem}_final_seed{seed}.txt")
        finals.append(trace.final_dist())
        iter_counts.append(len(trace) - 1)
        print(f"seed {seed}: iters={len(trace) - 1} final_dist={trace.final_dist():.6e}")
    _write_aggregate(
        f"{out_stem}_aggregate.csv",
        [_aggregate_row("n", n_val, sigma, finals, iter_counts)],
    )
    print(f"aggregate over {args.repeats} seed(s): mean final dist {np.mean(finals):.6e}")
    return EXIT_OK


def cmd_sweep(args):
    grid = []
    sigmas = [args.sigma] if args.sigma is not None else [0.0, 1.0]
    values = [round(0.2 + 0.1 * k, 10) for k in range(9)]
    if args.vary in ("p", "both"):
        grid += [("p", v, s) for s in sigmas for v in values]
    if args.vary in ("q", "both"):
        grid += [("q", v, s) for s in sigmas for v in values]

    rows = []
    for param_name, value, sigma in grid:
        p = value if param_name == "p" else 0.2
        q = value if param_name == "q" else 0.2
        finals, iter_counts = [], []
        for t in range(args.repeats):
            seed = args.seed + t
            try:
                params = model.RcmParams(
                    n=args.n, d=args.d, p=p, q=q, sigma=sigma, seed=seed
                )
                inst = model.generate_instance(params)
                config = _solver_config(args, params)
                X0 = _initial_stack(args.init, inst, seed)
                _, trace = solver.resync_run(inst.graph, config, X0, inst.ground_truth)
                finals.append(trace.final_dist())
                iter_counts.append(len(trace) - 1)
            except (RotsyncError, np.linalg.LinAlgError) as exc:
                print(
                    f"warning: {param_name}={value} sigma={sigma} seed={seed} failed: {exc}",
                    file=sys.stderr,
                )
        rows.append(_aggregate_row(param_name, value, sigma, finals, iter_counts))
        print(f"{param_name}={value} sigma={sigma}: mean {rows[-1][3]} ({len(rows)}/{len(grid)})")
    _write_aggregate(args.out, rows)
    print(f"wrote {args.out}: {len(rows)} rows")
    return EXIT_OK


def cmd_compare_init(args):
    rows = []
    for t in range(args.repeats):
        seed = args.seed + t
        inst = model.generate_instance(_params_from_args(args, seed))
        Y = model.dense_data_matrix(inst.graph)
        d_sel = rotgroup.dist(spectrin(Y, args.n, args.d), inst.ground_truth)
        d_naive = rotgroup.dist(naive_spectrin(Y, args.n, args.d), inst.ground_truth)
        rows.append((seed, d_sel, d_naive))
    if args.out:
        with open(args.out, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(("seed", "dist_spectral", "dist_naive"))
            for seed, a, b in rows:
                writer.writerow((seed, format(a, ".17g"), format(b, ".17g")))
    sel = np.array([r[1] for r in rows])
    naive = np.array([r[2] for r in rows])
    wins = float(np.mean(sel <= naive))
    print(
        f"selected init mean dist {sel.mean():.4f}, naive {naive.mean():.4f}, "
        f"selected <= naive on {100 * wins:.0f}% of {len(rows)} seeds"
    )
    return EXIT_OK


def cmd_plotdata(args):
    paths = []
    for chunk in args.in_path:
        paths.extend(s for s in chunk.split(",") if s)
    if not paths:
        raise InvalidParams("no input files given")
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)

    plot_entries = []
    for path in paths:
        with open(path, newline="") as fh:
            header = fh.readline().strip().split(",")
        stem = Path(path).stem
        if tuple(header) == solver.TRACE_COLUMNS:
            trace = solver.read_trace_csv(path)
            if len(trace) == 0:
                raise ParseError(f"{path}: trace has no data rows", 2)
            cols = trace.columns()
            names = [c for c in solver.TRACE_COLUMNS if c in cols]
            dat = outdir / f"{stem}.dat"
            with open(dat, "w") as fh:
                fh.write("# " + " ".join(names) + "\n")
                for k in range(len(trace)):
                    fh.write(" ".join(format(cols[c][k], ".17g") for c in names) + "\n")
            ycol = names.index("dist") + 1 if "dist" in cols else names.index("objective") + 1
            yname = "dist" if "dist" in cols else "objective"
            plot_entries.append((dat.name, 1, ycol, None, f"{stem} {yname}"))
        elif tuple(header) == AGGREGATE_COLUMNS:
            groups = {}
            with open(path, newline="") as fh:
                reader = csv.reader(fh)
                next(reader)
                for lineno, row in enumerate(reader, start=2):
                    if len(row) != len(AGGREGATE_COLUMNS):
                        raise ParseError(f"{path}: expected {len(AGGREGATE_COLUMNS)} fields", lineno)
                    try:
                        key = (row[0], float(row[2]))
                        groups.setdefault(key, []).append(
                            (float(row[1]), float(row[3]), float(row[4]))
                        )
                    except ValueError as exc:
                        raise ParseError(f"{path}: bad numeric field: {exc}", lineno) from None
            if not groups:
                raise ParseError(f"{path}: aggregate has no data rows", 2)
            for (param_name, sigma), pts in sorted(groups.items()):
                dat = outdir / f"{stem}_{param_name}_sigma{sigma:g}.dat"
                with open(dat, "w") as fh:
                    fh.write(f"# {param_name} mean_final_dist std_final_dist\n")
                    for v, m, s in sorted(pts):
                        fh.write(f"{v:.17g} {m:.17g} {s:.17g}\n")
                plot_entries.append(
                    (dat.name, 1, 2, 3, f"{stem} vary {param_name} sigma={sigma:g}")
                )
        else:
            raise ParseError(f"{path}: unrecognized CSV header", 1)

    script = outdir / "plot.gp"
    lines = [
        "# gnuplot script generated from the emitted .dat files",
        "set datafile commentschars '#'",
        "set logscale y",
        "set key outside",
    ]
    parts = []
    for name, xcol, ycol, errcol, title in plot_entries:
        if errcol is None:
            parts.append(f"'{name}' using {xcol}:{ycol} with lines title '{title}'")
        else:
            parts.append(
                f"'{name}' using {xcol}:{ycol}:{errcol} with yerrorlines title '{title}'"
            )
    lines.append("plot \\\n  " + ", \\\n  ".join(parts))
    script.write_text("\n".join(lines) + "\n")
    print(f"wrote {len(plot_entries)} series and {script}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify: drive each oracle against the production path it validates.


def _suite_procrustes_grid(n_override=None):
    rng = np.random.default_rng(100)
    grid = oracles.GridSpec(resolution=100_000)
    worst = 0.0
    for _ in range(10):
        n = int(rng.integers(1, 4))
        X = rotgroup.random_rotation(2, rng, size=n)
        Y = rotgroup.random_rotation(2, rng, size=n)
        exact = rotgroup.dist(X, Y)
        _, brute = oracles.procrustes_oracle_d2(X, Y, grid)
        if brute < exact - 1e-9:
            return False, f"grid beat the closed form by {exact - brute:.2e}"
        worst = max(worst, abs(brute - exact))
    return worst <= 1e-3, f"max |grid - procrustes| = {worst:.2e} (tol 1e-3)"


def _sample_smooth_point(inst, rng):
    # retry until all residuals clear the smoothness threshold
    for _ in range(50):
        X = rotgroup.random_rotation(inst.graph.d, rng, size=inst.graph.n)
        r = solver._residuals(X, inst.graph)
        if float(np.min(r)) > oracles.SMOOTH_MIN_RESIDUAL:
            return X, r
    raise NonSmoothPoint("could not find a smooth point")


def _suite_finite_difference(n_override=None):
    params = model.RcmParams(n=12, d=3, p=0.7, q=0.9, sigma=0.0, seed=3)
    inst = model.generate_instance(params)
    rng = np.random.default_rng(200)
    X, residuals = _sample_smooth_point(inst, rng)
    grad = solver.riemannian_subgradient(X, inst.graph)
    worst = 0.0
    for _ in range(10):
        V = rotgroup.random_tangent(X, rng)
        V /= np.linalg.norm(V)
        fd = oracles.finite_difference_directional(
            lambda Z: solver.objective(Z, inst.graph), X, V, t=1e-6, residuals=residuals
        )
        ip = float(np.sum(grad * V))
        worst = max(worst, abs(fd - ip) / max(1e-12, abs(ip)))
    return worst <= 1e-4, f"max relative gradient error = {worst:.2e} (tol 1e-4)"


def _suite_spectrum(n_override=None):
    rng = np.random.default_rng(300)
    worst = 0.0
    for size in (30, 60, 90):
        A = rng.standard_normal((size, size))
        A = (A + A.T) / 2.0
        vals, vecs = oracles.spectrum_oracle(A)
        pairs = leading_eigenpairs(A, 4)
        angle = oracles.principal_angle(pairs.vectors, vecs[:, :4])
        gap = abs(vals[3] - vals[4])
        if gap < 1e-3:
            continue  # no stable top-4 subspace to compare
        worst = max(worst, angle, float(np.max(np.abs(vals[:4] - pairs.values))) / size)
    return worst <= 1e-8, f"max subspace angle / value error = {worst:.2e} (tol 1e-8)"


def _suite_haar_stats(n_override=None):
    rng = np.random.default_rng(400)
    traces = np.trace(rotgroup.random_rotation(2, rng, size=40_000), axis1=-2, axis2=-1)
    ks = oracles.ks_statistic(traces, oracles.so2_trace_cdf)
    ks_bound = 1.63 / np.sqrt(traces.size)  # ~1% KS critical value
    sample = rotgroup.random_rotation(3, rng, size=50_000)
    mean_bound = 3.0 / np.sqrt(sample.shape[0])
    worst_mean = float(np.max(np.abs(np.mean(sample, axis=0))))
    ok = ks <= ks_bound and worst_mean <= mean_bound
    return ok, (
        f"SO(2) trace KS = {ks:.4f} (bound {ks_bound:.4f}), "
        f"SO(3) max |entry mean| = {worst_mean:.4f} (bound {mean_bound:.4f})"
    )


def _suite_weak_sharpness(n_override=None):
    n = n_override or 200
    params = model.RcmParams(n=n, d=3, p=0.5, q=0.3, sigma=0.0, seed=11)
    inst = model.generate_instance(params)
    threshold = n * params.p * params.q / 8.0
    f_star = solver.objective(inst.ground_truth, inst.graph)
    rng = np.random.default_rng(500)
    radius = 0.05 * params.p
    ratios = []
    for _ in range(100):
        X = oracles.perturb_within(inst.ground_truth, radius, rng)
        gap = solver.objective(X, inst.graph) - f_star
        d1 = rotgroup.dist1(X, inst.ground_truth)
        ratios.append(gap / d1)
    ratios = np.array(ratios)
    frac = float(np.mean(ratios >= threshold))
    ok = frac >= 0.99
    return ok, (
        f"min (f(X)-f(X*))/dist1 = {ratios.min():.3f} vs npq/8 = {threshold:.3f}, "
        f"satisfied on {100 * frac:.0f}% of samples"
    )


_SUITES = {
    "procrustes-grid": _suite_procrustes_grid,
    "finite-difference": _suite_finite_difference,
    "spectrum": _suite_spectrum,
    "haar-stats": _suite_haar_stats,
    "weak-sharpness": _suite_weak_sharpness,
}


def run_verify_suites(names, n_override=None):
    """Run the named oracle suites; returns [(name, passed, detail)]."""
    return [(name, *_SUITES[name](n_override)) for name in names]


def cmd_verify(args):
    names = SUITE_NAMES if args.suite == "all" else (args.suite,)
    results = run_verify_suites(names, n_override=args.n)
    all_ok = True
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
        all_ok &= ok
    return EXIT_OK if all_ok else EXIT_NUMERICAL


def build_parser():
    parser = argparse.ArgumentParser(
        prog="rotsync",
        description="Rotation synchronization experiments: generate, solve, sweep, verify.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a synthetic instance file")
    _add_model_args(p)
    p.add_argument("--out", required=True, help="output instance path")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("run", help="solve an instance and write trace CSVs")
    _add_model_args(p)
    _add_solver_args(p)
    p.add_argument("--in", dest="in_path", default=None, help="instance file to load")
    p.add_argument("--out", default="run", help="output stem for trace/final/aggregate files")
    p.add_argument("--init", choices=INIT_CHOICES, default="spectral")
    p.add_argument("--repeats", type=int, default=1, help="number of seeds to run")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="sweep corruption ratios, write an aggregate CSV")
    _add_model_args(p)
    _add_solver_args(p)
    p.add_argument("--vary", choices=["p", "q", "both"], default="both")
    p.add_argument("--init", choices=INIT_CHOICES, default="spectral")
    p.add_argument("--repeats", type=int, default=20)
    p.add_argument("--out", required=True, help="aggregate CSV path")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("compare-init", help="selected vs naive spectral initialization")
    _add_model_args(p)
    p.add_argument("--repeats", type=int, default=20)
    p.add_argument("--out", default=None, help="optional per-seed CSV path")
    p.set_defaults(func=cmd_compare_init)

    p = sub.add_parser("verify", help="run the oracle suites")
    p.add_argument("--suite", choices=SUITE_NAMES + ("all",), default="all")
    p.add_argument("--n", type=int, default=None, help="override the weak-sharpness size")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("plotdata", help="convert trace/sweep CSVs to plot-ready files")
    p.add_argument(
        "--in",
        dest="in_path",
        action="append",
        required=True,
        help="input CSV (repeat or comma-separate for several)",
    )
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_plotdata)

    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else EXIT_USAGE
    try:
        return args.func(args)
    except (ParseError, RotsyncError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
