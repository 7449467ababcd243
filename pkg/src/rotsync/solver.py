"""Least-unsquared synchronization objective and its Riemannian subgradient solver.

The objective sums unsquared Frobenius residuals ``||X_i X_j^T - Y_ij||_F``
over the *directed* edge set, i.e. each stored pair is counted in both
orientations. Under the transpose storage convention both orientations have
equal residuals, so the objective equals twice the sum over stored edges and
the per-block subdifferential carries a matching factor 2. Residuals below
``zero_residual_tol`` contribute the zero subgradient, which makes an exact
solution a true fixed point.

Iterates stay on SO(d)^n via the positive-diagonal QR retraction, with steps
``mu_k = mu0 * gamma**k``. All blocks are updated simultaneously from the
same input stack, and the per-block edge sums use a fixed ordering, so runs
are bit-reproducible.
"""

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParams, ParseError, RankDeficient
from .rotgroup import distances, qr_retract, tangent_project

DEFAULT_ZERO_RESIDUAL_TOL = 1e-12
_MAX_STEP_HALVINGS = 30

TRACE_COLUMNS = ("iter", "mu", "objective", "dist", "dist1", "dist_inf", "g_part", "h_part")


@dataclass
class SolverConfig:
    """Step schedule and stopping controls.

    mu0 is the initial step size (see ``default_mu0`` for the standard
    choices), gamma the geometric decay factor. Iteration stops at max_iters
    or once the step falls below step_floor, whichever comes first.
    """

    mu0: float
    gamma: float = 0.95
    max_iters: int = 500
    step_floor: float = 1e-16
    zero_residual_tol: float = DEFAULT_ZERO_RESIDUAL_TOL

    def __post_init__(self):
        if self.mu0 <= 0:
            raise InvalidParams(f"mu0 must be positive, got {self.mu0}")
        if not 0.0 < self.gamma < 1.0:
            raise InvalidParams(f"gamma must lie in (0, 1), got {self.gamma}")
        if self.max_iters < 1:
            raise InvalidParams(f"max_iters must be positive, got {self.max_iters}")


def default_mu0(n, p=None, q=None, num_edges=None):
    """Standard initial step size.

    With known ratios this is ``1/(n p q)``. Without them the observation
    ratio is estimated from the edge count (and the true ratio taken as 1),
    which reduces to ``n / (2 |E|)``; a documented heuristic fallback.
    """
    if p is not None and q is not None:
        return 1.0 / (n * p * q)
    if num_edges is None:
        raise InvalidParams("need p and q, or an edge count")
    if num_edges == 0:
        raise InvalidParams("cannot infer a step size for an empty graph")
    return n / (2.0 * num_edges)


def _residuals(X, graph):
    """Per stored edge: ||X_i X_j^T - Y_ij||_F, in edge_arrays order."""
    ei, ej, Y = graph.edge_arrays()
    rel = X[ei] @ np.swapaxes(X[ej], -2, -1) - Y
    return np.linalg.norm(rel, axis=(1, 2))


def objective(X, graph):
    """Sum of unsquared residuals over the directed edge set."""
    return 2.0 * float(np.sum(_residuals(X, graph)))


def objective_parts(X, graph):
    """(clean-edge part, outlier-edge part) of the objective; needs labels."""
    mask = graph.label_array()
    if mask is None:
        raise InvalidParams("graph carries no edge labels")
    r = _residuals(X, graph)
    g = 2.0 * float(np.sum(r[mask]))
    return g, 2.0 * float(np.sum(r)) - g


def _subgradient_and_residuals(X, graph, zero_residual_tol):
    """Full Euclidean subgradient stack plus the per-edge residuals it used."""
    n, d = X.shape[0], X.shape[-1]
    ei, ej, Y = graph.edge_arrays()
    Xi, Xj = X[ei], X[ej]
    r = np.linalg.norm(Xi @ np.swapaxes(Xj, -2, -1) - Y, axis=(1, 2))
    inv = np.zeros_like(r)
    active = r > zero_residual_tol
    inv[active] = 1.0 / r[active]
    scale = inv[:, None, None]
    # accumulate per-edge terms into their endpoint blocks; bincount keeps a
    # fixed summation order, so results are reproducible
    Ti = ((Xi - Y @ Xj) * scale).reshape(-1, d * d)
    Tj = ((Xj - np.swapaxes(Y, -2, -1) @ Xi) * scale).reshape(-1, d * d)
    G = np.empty((n, d * d))
    for c in range(d * d):
        G[:, c] = np.bincount(ei, weights=Ti[:, c], minlength=n)
        G[:, c] += np.bincount(ej, weights=Tj[:, c], minlength=n)
    return 2.0 * G.reshape(n, d, d), r


def euclidean_subgradient(X, graph, zero_residual_tol=DEFAULT_ZERO_RESIDUAL_TOL):
    """Blockwise Euclidean subgradient of the objective, as an (n, d, d) stack.

    Block i is ``2 * sum_j (X_i - Y_ij X_j) / ||X_i X_j^T - Y_ij||_F`` over
    neighbors j, with zero-residual terms contributing zero.
    """
    return _subgradient_and_residuals(X, graph, zero_residual_tol)[0]


def euclidean_subgradient_block(X, graph, i, zero_residual_tol=DEFAULT_ZERO_RESIDUAL_TOL):
    """Euclidean subgradient with respect to block i alone; reference form."""
    d = graph.d
    total = np.zeros((d, d))
    for j in graph.neighbors(i):
        Yij = graph.measurement(i, j)
        r = np.linalg.norm(X[i] @ X[j].T - Yij)
        if r > zero_residual_tol:
            total += (X[i] - Yij @ X[j]) / r
    return 2.0 * total


def riemannian_subgradient(X, graph, zero_residual_tol=DEFAULT_ZERO_RESIDUAL_TOL):
    """Euclidean subgradient projected blockwise onto the tangent spaces."""
    return tangent_project(X, euclidean_subgradient(X, graph, zero_residual_tol))


def resync_step(X, graph, mu, zero_residual_tol=DEFAULT_ZERO_RESIDUAL_TOL):
    """One simultaneous subgradient update of every block.

    All subgradients are evaluated at the input stack before any block is
    retracted, then each block moves by -mu along its Riemannian subgradient
    and is retracted back onto SO(d).
    """
    return qr_retract(X, riemannian_subgradient(X, graph, zero_residual_tol), mu)


@dataclass
class IterationTrace:
    """Per-iteration history of a solver run.

    Row k describes the iterate X^k together with the step size scheduled
    from it; there are (iterations executed + 1) rows. Distance columns are
    present only when the ground truth was supplied, the objective split only
    when the graph carries edge labels.
    """

    iters: list = field(default_factory=list)
    mus: list = field(default_factory=list)
    objectives: list = field(default_factory=list)
    dists: list | None = None
    dist1s: list | None = None
    dist_infs: list | None = None
    g_parts: list | None = None
    h_parts: list | None = None

    def __len__(self):
        return len(self.iters)

    def final_dist(self):
        if not self.dists:
            return None
        return self.dists[-1]

    def columns(self):
        """Trace as a dict of column name to list, empty strings omitted."""
        cols = {"iter": self.iters, "mu": self.mus, "objective": self.objectives}
        for name, vals in (
            ("dist", self.dists),
            ("dist1", self.dist1s),
            ("dist_inf", self.dist_infs),
            ("g_part", self.g_parts),
            ("h_part", self.h_parts),
        ):
            if vals is not None:
                cols[name] = vals
        return cols

    def write_csv(self, path):
        """Write the trace with the standard header; 17 significant digits."""
        cols = self.columns()
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(TRACE_COLUMNS)
            for row_idx in range(len(self.iters)):
                row = []
                for name in TRACE_COLUMNS:
                    if name not in cols:
                        row.append("")
                    elif name == "iter":
                        row.append(str(cols[name][row_idx]))
                    else:
                        row.append(format(cols[name][row_idx], ".17g"))
                writer.writerow(row)


def read_trace_csv(path):
    """Parse a trace CSV written by ``IterationTrace.write_csv``."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != TRACE_COLUMNS:
        raise ParseError(f"expected header {','.join(TRACE_COLUMNS)}", 1)
    trace = IterationTrace()
    present = {name: [] for name in TRACE_COLUMNS[1:]}
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(TRACE_COLUMNS):
            raise ParseError(f"expected {len(TRACE_COLUMNS)} fields", lineno)
        try:
            trace.iters.append(int(row[0]))
            for name, cell in zip(TRACE_COLUMNS[1:], row[1:]):
                if cell != "":
                    present[name].append(float(cell))
        except ValueError as exc:
            raise ParseError(f"bad numeric field: {exc}", lineno) from None
    n_rows = len(trace.iters)
    for name, values in present.items():
        if values and len(values) != n_rows:
            raise ParseError(f"column {name} is partially filled", len(rows))
    trace.mus = present["mu"]
    trace.objectives = present["objective"]
    trace.dists = present["dist"] or None
    trace.dist1s = present["dist1"] or None
    trace.dist_infs = present["dist_inf"] or None
    trace.g_parts = present["g_part"] or None
    trace.h_parts = present["h_part"] or None
    return trace


def resync_run(graph, config, init, ground_truth=None):
    """Run the subgradient iteration from ``init`` until the schedule stops.

    Steps follow ``mu_k = mu0 * gamma**k`` until k reaches max_iters or the
    step falls below step_floor. Returns the final stack and the full trace;
    deterministic given its inputs. A ``RankDeficient`` retraction (possible
    only for extreme steps) is retried with a halved step a bounded number
    of times before giving up.
    """
    X = np.array(init, dtype=float, copy=True)
    track_dist = ground_truth is not None
    clean_mask = graph.label_array()
    trace = IterationTrace()
    if track_dist:
        trace.dists, trace.dist1s, trace.dist_infs = [], [], []
    if clean_mask is not None:
        trace.g_parts, trace.h_parts = [], []

    def record(k, mu, r):
        trace.iters.append(k)
        trace.mus.append(mu)
        total = 2.0 * float(np.sum(r))
        trace.objectives.append(total)
        if clean_mask is not None:
            g = 2.0 * float(np.sum(r[clean_mask]))
            trace.g_parts.append(g)
            trace.h_parts.append(total - g)
        if track_dist:
            d2, d1, dinf = distances(X, ground_truth)
            trace.dists.append(d2)
            trace.dist1s.append(d1)
            trace.dist_infs.append(dinf)

    k = 0
    while True:
        mu_k = config.mu0 * config.gamma**k
        G, r = _subgradient_and_residuals(X, graph, config.zero_residual_tol)
        record(k, mu_k, r)
        if k >= config.max_iters or mu_k < config.step_floor:
            break
        V = tangent_project(X, G)
        mu_try = mu_k
        for attempt in range(_MAX_STEP_HALVINGS + 1):
            try:
                X = qr_retract(X, V, mu_try)
                break
            except RankDeficient:
                if attempt == _MAX_STEP_HALVINGS:
                    raise
                mu_try /= 2.0
        k += 1
    return X, trace
