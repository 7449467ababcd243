"""Synthetic measurement generation under random corruption, plus instance IO.

An instance couples an observation graph of pairwise relative-rotation
measurements with the hidden ground-truth stack that produced it. Pairs are
observed independently with probability q; an observed pair carries the true
relative rotation with probability p (optionally perturbed by Gaussian noise
and reprojected onto SO(d)) and a Haar-uniform outlier rotation otherwise.

Measurements are stored once per unordered pair ``i < j``; reading the
reversed pair returns the exact transpose, so the assembled data matrix is
symmetric bit for bit. Missing pairs are simply absent.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParams, ParseError
from .rotgroup import is_rotation, project_so, random_rotation

# Membership tolerance for measurement blocks in noise-free instances.
MEASUREMENT_SO_TOL = 1e-8

TRUE_EDGE = 1
OUTLIER = 0
_UNLABELED = -1


@dataclass(frozen=True)
class RcmParams:
    """Parameters of the random corruption model.

    n nodes in dimension d; observation ratio q and true-observation ratio p,
    both in (0, 1]; additive noise level sigma >= 0; RNG seed.
    """

    n: int
    d: int
    p: float
    q: float
    sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.n < 2:
            raise InvalidParams(f"need at least two nodes, got n={self.n}")
        if self.d < 2:
            raise InvalidParams(f"dimension must be at least 2, got d={self.d}")
        if not 0.0 < self.p <= 1.0:
            raise InvalidParams(f"p must lie in (0, 1], got {self.p}")
        if not 0.0 < self.q <= 1.0:
            raise InvalidParams(f"q must lie in (0, 1], got {self.q}")
        if self.sigma < 0.0:
            raise InvalidParams(f"sigma must be nonnegative, got {self.sigma}")


def log_cube_ratio(n):
    """The (log n / n)^(1/3) observation/corruption ratio as a function of n."""
    return float((np.log(n) / n) ** (1.0 / 3.0))


class ObservationGraph:
    """Sparse symmetric block matrix of pairwise rotation measurements.

    ``measurements`` maps unordered pairs ``(i, j)`` with ``i < j`` to a
    ``(d, d)`` block; ``labels`` optionally maps the same keys to TRUE_EDGE
    or OUTLIER (hidden ground truth, used by tests and traces only).
    """

    def __init__(self, n, d, measurements, labels=None):
        self.n = int(n)
        self.d = int(d)
        for (i, j) in measurements:
            if i == j:
                raise InvalidParams(f"self-loop ({i}, {j}) is not allowed")
            if not (0 <= i < j < self.n):
                raise InvalidParams(f"edge ({i}, {j}) out of range for n={self.n}")
        if labels is not None and set(labels) != set(measurements):
            raise InvalidParams("label keys must match measurement keys")
        self.measurements = dict(measurements)
        self.labels = dict(labels) if labels is not None else None
        self._arrays = None
        self._label_array = None

    @property
    def num_edges(self):
        return len(self.measurements)

    def edges(self):
        """Unordered edges as sorted (i, j) pairs with i < j."""
        return sorted(self.measurements)

    def has_edge(self, i, j):
        return (min(i, j), max(i, j)) in self.measurements

    def measurement(self, i, j):
        """Block for the ordered pair (i, j); the reverse order transposes."""
        if i < j:
            return self.measurements[(i, j)]
        return self.measurements[(j, i)].T

    def label(self, i, j):
        if self.labels is None:
            return None
        return self.labels[(min(i, j), max(i, j))]

    def neighbors(self, i):
        out = []
        for (a, b) in self.measurements:
            if a == i:
                out.append(b)
            elif b == i:
                out.append(a)
        return sorted(out)

    def edge_arrays(self):
        """Edges in sorted order as index arrays plus the stacked blocks.

        Returns ``(ei, ej, Y)`` with ``ei < ej`` elementwise and
        ``Y[k] = measurement(ei[k], ej[k])``. Cached; treat as read-only.
        """
        if self._arrays is None:
            edges = self.edges()
            if edges:
                ei = np.fromiter((e[0] for e in edges), dtype=np.intp, count=len(edges))
                ej = np.fromiter((e[1] for e in edges), dtype=np.intp, count=len(edges))
                Y = np.stack([self.measurements[e] for e in edges])
            else:
                ei = np.empty(0, dtype=np.intp)
                ej = np.empty(0, dtype=np.intp)
                Y = np.empty((0, self.d, self.d))
            self._arrays = (ei, ej, Y)
        return self._arrays

    def label_array(self):
        """Labels aligned with edge_arrays order (True for clean edges), or None."""
        if self.labels is None:
            return None
        if self._label_array is None:
            self._label_array = np.array([self.labels[e] == TRUE_EDGE for e in self.edges()])
        return self._label_array


@dataclass(frozen=True, eq=False)
class Instance:
    """A generated problem: observation graph, its ground truth, parameters."""

    graph: ObservationGraph
    ground_truth: np.ndarray
    params: RcmParams


def generate_instance(params):
    """Sample an instance of the random corruption model.

    Ground-truth blocks are SO(d) projections of iid Gaussian matrices. Each
    unordered pair is observed with probability q; an observed pair is clean
    with probability p. A clean edge carries ``X_i X_j^T``, perturbed as
    ``project_so(X_i X_j^T + sigma * G)`` when sigma > 0; an outlier edge
    carries a Haar-uniform rotation. Deterministic given the seed.
    """
    n, d = params.n, params.d
    rng = np.random.default_rng(params.seed)

    ground_truth = project_so(rng.standard_normal((n, d, d)))

    iu, ju = np.triu_indices(n, k=1)
    observed = rng.random(iu.size) < params.q
    ei, ej = iu[observed], ju[observed]
    clean_mask = rng.random(ei.size) < params.p

    blocks = np.empty((ei.size, d, d))
    gt_rel = ground_truth[ei[clean_mask]] @ np.swapaxes(ground_truth[ej[clean_mask]], -2, -1)
    if params.sigma > 0.0:
        gt_rel = project_so(gt_rel + params.sigma * rng.standard_normal(gt_rel.shape))
    blocks[clean_mask] = gt_rel
    n_outliers = int(np.sum(~clean_mask))
    if n_outliers:
        blocks[~clean_mask] = random_rotation(d, rng, size=n_outliers)

    measurements = {}
    labels = {}
    for k in range(ei.size):
        key = (int(ei[k]), int(ej[k]))
        measurements[key] = blocks[k]
        labels[key] = TRUE_EDGE if clean_mask[k] else OUTLIER

    graph = ObservationGraph(n, d, measurements, labels)
    return Instance(graph=graph, ground_truth=ground_truth, params=params)


def dense_data_matrix(graph):
    """Assemble the (n*d, n*d) symmetric data matrix.

    Block (i, j) holds the measurement for each edge, zero for missing pairs,
    and zero on the diagonal. Symmetry is exact because block (j, i) is the
    stored transpose.
    """
    n, d = graph.n, graph.d
    Y = np.zeros((n * d, n * d))
    for (i, j), block in graph.measurements.items():
        Y[i * d : (i + 1) * d, j * d : (j + 1) * d] = block
        Y[j * d : (j + 1) * d, i * d : (i + 1) * d] = block.T
    return Y


def _fmt(x):
    return format(float(x), ".17g")


def save_instance(inst, path):
    """Write an instance in the line-oriented text format.

    Line 1: ``n d sigma``; line 2: ``p q seed``; one line per edge
    (``i j label`` then the block row-major, 17 significant digits);
    a ``GROUND_TRUTH`` sentinel; n ground-truth blocks, row-major.
    """
    g, p = inst.graph, inst.params
    lines = [
        f"{g.n} {g.d} {_fmt(p.sigma)}",
        f"{_fmt(p.p)} {_fmt(p.q)} {p.seed}",
    ]
    for (i, j) in g.edges():
        label = _UNLABELED if g.labels is None else g.labels[(i, j)]
        entries = " ".join(_fmt(v) for v in g.measurements[(i, j)].ravel())
        lines.append(f"{i} {j} {label} {entries}")
    lines.append("GROUND_TRUTH")
    for block in inst.ground_truth:
        lines.append(" ".join(_fmt(v) for v in block.ravel()))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def save_stack(X, path):
    """Write a rotation stack: header ``n d``, then one row-major block per line."""
    X = np.asarray(X)
    n, d = X.shape[0], X.shape[-1]
    lines = [f"{n} {d}"]
    for block in X:
        lines.append(" ".join(_fmt(v) for v in block.ravel()))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_stack(path):
    """Read a stack written by ``save_stack``."""
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ParseError("empty stack file", 1)
    head = lines[0].split()
    if len(head) != 2:
        raise ParseError("header must be 'n d'", 1)
    try:
        n, d = int(head[0]), int(head[1])
    except ValueError as exc:
        raise ParseError(f"bad integer in header: {exc}", 1) from None
    if len(lines) - 1 != n:
        raise ParseError(f"expected {n} blocks, got {len(lines) - 1}", len(lines))
    X = np.empty((n, d, d))
    for k in range(n):
        X[k] = _parse_floats(lines[1 + k].split(), d * d, 2 + k, "stack block").reshape(d, d)
    return X


def _parse_floats(fields, count, lineno, what):
    if len(fields) != count:
        raise ParseError(f"expected {count} values for {what}, got {len(fields)}", lineno)
    try:
        return np.array([float(v) for v in fields])
    except ValueError as exc:
        raise ParseError(f"bad float in {what}: {exc}", lineno) from None


def load_instance(path):
    """Read an instance written by ``save_instance``; exact inverse.

    Raises ``ParseError`` (with the offending line number) on malformed
    input, including measurement blocks that are not rotations to 1e-8
    when the header declares sigma = 0.
    """
    with open(path) as fh:
        lines = fh.read().splitlines()
    if len(lines) < 2:
        raise ParseError("file must start with two header lines", len(lines) or 1)

    head = lines[0].split()
    if len(head) != 3:
        raise ParseError("header must be 'n d sigma'", 1)
    try:
        n, d = int(head[0]), int(head[1])
    except ValueError as exc:
        raise ParseError(f"bad integer in header: {exc}", 1) from None
    sigma = _parse_floats(head[2:], 1, 1, "sigma")[0]

    meta = lines[1].split()
    if len(meta) != 3:
        raise ParseError("metadata must be 'p q seed'", 2)
    pq = _parse_floats(meta[:2], 2, 2, "p q")
    try:
        seed = int(meta[2])
    except ValueError as exc:
        raise ParseError(f"bad seed: {exc}", 2) from None
    try:
        params = RcmParams(n=n, d=d, p=pq[0], q=pq[1], sigma=sigma, seed=seed)
    except InvalidParams as exc:
        raise ParseError(str(exc), 1) from None

    measurements = {}
    raw_labels = {}
    lineno = 2
    for lineno, line in enumerate(lines[2:], start=3):
        if line == "GROUND_TRUTH":
            break
        fields = line.split()
        if len(fields) != 3 + d * d:
            raise ParseError(f"edge line needs 3 + d*d = {3 + d * d} fields", lineno)
        try:
            i, j, label = int(fields[0]), int(fields[1]), int(fields[2])
        except ValueError as exc:
            raise ParseError(f"bad edge indices: {exc}", lineno) from None
        if not 0 <= i < j < n:
            raise ParseError(f"edge ({i}, {j}) must satisfy 0 <= i < j < n", lineno)
        if (i, j) in measurements:
            raise ParseError(f"duplicate edge ({i}, {j})", lineno)
        if label not in (TRUE_EDGE, OUTLIER, _UNLABELED):
            raise ParseError(f"label must be 1, 0 or -1, got {label}", lineno)
        block = _parse_floats(fields[3:], d * d, lineno, "measurement block").reshape(d, d)
        if sigma == 0.0 and not is_rotation(block, tol=MEASUREMENT_SO_TOL):
            raise ParseError("measurement block is not a rotation (sigma = 0)", lineno)
        measurements[(i, j)] = block
        raw_labels[(i, j)] = label
    else:
        raise ParseError("missing GROUND_TRUTH sentinel", len(lines))

    gt_lines = lines[lineno:]
    if len(gt_lines) != n:
        raise ParseError(f"expected {n} ground-truth blocks, got {len(gt_lines)}", len(lines))
    ground_truth = np.empty((n, d, d))
    for k, line in enumerate(gt_lines):
        block = _parse_floats(line.split(), d * d, lineno + 1 + k, "ground-truth block")
        ground_truth[k] = block.reshape(d, d)
        if not is_rotation(ground_truth[k], tol=MEASUREMENT_SO_TOL):
            raise ParseError("ground-truth block is not a rotation", lineno + 1 + k)

    label_values = set(raw_labels.values())
    if label_values <= {TRUE_EDGE, OUTLIER}:
        labels = raw_labels
    elif label_values == {_UNLABELED} or not raw_labels:
        labels = None
    else:
        raise ParseError("labels mix unlabeled (-1) with labeled edges", lineno)

    graph = ObservationGraph(n, d, measurements, labels)
    return Instance(graph=graph, ground_truth=ground_truth, params=params)
