"""Independent brute-force references used to validate the production paths.

Nothing here shares a numerical kernel with the code it checks: the d=2
alignment oracle scans an explicit angle grid instead of using the SVD
projection, the eigensolver is a from-scratch Householder tridiagonalization
followed by implicit-shift QL instead of LAPACK, and directional derivatives
come from central differences of function values. These exist both for the
test suite and for the command-line ``verify`` entry point.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParams, NonSmoothPoint
from .rotgroup import qr_retract

SMOOTH_MIN_RESIDUAL = 1e-6


@dataclass(frozen=True)
class GridSpec:
    """Number of grid points covering [0, 2*pi) in the angle scan."""

    resolution: int = 100_000

    def __post_init__(self):
        if self.resolution < 1000:
            raise InvalidParams(f"resolution must be at least 1000, got {self.resolution}")


def rotation2(theta):
    """2x2 rotation matrices for an angle or an array of angles."""
    theta = np.asarray(theta, dtype=float)
    c, s = np.cos(theta), np.sin(theta)
    return np.stack(
        [np.stack([c, -s], axis=-1), np.stack([s, c], axis=-1)],
        axis=-2,
    )


def procrustes_oracle_d2(X, Y, grid=GridSpec()):
    """Exhaustive d=2 alignment: scan ||X - Y R(theta)||_F over an angle grid.

    Returns the minimizing angle and its residual. Grid resolution bounds the
    error: the true optimum is within one grid step of the returned angle.
    """
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if X.shape[-1] != 2:
        raise InvalidParams("the angle-grid oracle only covers d = 2")
    thetas = np.linspace(0.0, 2.0 * np.pi, grid.resolution, endpoint=False)
    R = rotation2(thetas)
    diff = X[None] - np.einsum("nij,gjk->gnik", Y, R)
    totals = np.sqrt(np.sum(diff**2, axis=(1, 2, 3)))
    best = int(np.argmin(totals))
    return float(thetas[best]), float(totals[best])


def finite_difference_directional(f, X, V, t, residuals=None):
    """Central-difference directional derivative of f along a tangent V.

    Evaluates f on the retraction curve: since ``qr_retract(X, V, mu)``
    moves by -mu*V, the forward point is ``qr_retract(X, V, -t)`` and the
    derivative is ``(f(forward) - f(backward)) / (2 t)``, which approximates
    the inner product of the Riemannian gradient with V.

    When per-edge residuals at X are supplied, raises ``NonSmoothPoint``
    unless all exceed SMOOTH_MIN_RESIDUAL; central differences are only
    trustworthy away from the objective's kinks.
    """
    if residuals is not None:
        residuals = np.asarray(residuals)
        if residuals.size and float(np.min(residuals)) <= SMOOTH_MIN_RESIDUAL:
            raise NonSmoothPoint("a residual sits below the smoothness threshold")
    forward = f(qr_retract(X, V, -t))
    backward = f(qr_retract(X, V, t))
    return (forward - backward) / (2.0 * t)


def _tridiagonalize(A):
    """Householder similarity reduction A = Q T Q^T with T tridiagonal."""
    n = A.shape[0]
    T = A.copy()
    Q = np.eye(n)
    for k in range(n - 2):
        x = T[k + 1 :, k]
        alpha = np.linalg.norm(x)
        if alpha == 0.0:
            continue
        if x[0] >= 0.0:
            alpha = -alpha
        v = x.copy()
        v[0] -= alpha
        vnorm = np.linalg.norm(v)
        if vnorm == 0.0:
            continue
        v /= vnorm
        sub = T[k + 1 :, k + 1 :]
        w = sub @ v
        c = v @ w
        sub -= 2.0 * np.outer(v, w) + 2.0 * np.outer(w, v) - 4.0 * c * np.outer(v, v)
        T[k + 1 :, k] = 0.0
        T[k, k + 1 :] = 0.0
        T[k + 1, k] = alpha
        T[k, k + 1] = alpha
        Qsub = Q[:, k + 1 :]
        Qsub -= 2.0 * np.outer(Qsub @ v, v)
    d = np.diagonal(T).copy()
    e = np.diagonal(T, offset=1).copy()
    return d, e, Q


def _ql_implicit_shift(d, e, Q, max_sweeps=50):
    """Implicit-shift QL on a tridiagonal matrix, rotations folded into Q."""
    n = d.size
    eps = np.finfo(float).eps
    e = np.append(e, 0.0)
    # Rotations touch eigenvector pairs; row-contiguous storage keeps each
    # Givens update cheap. Qt[k] is the k-th eigenvector.
    Qt = np.ascontiguousarray(Q.T)
    scratch = np.empty(n)
    for l in range(n):
        sweeps = 0
        while True:
            for m in range(l, n - 1):
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= eps * dd:
                    break
            else:
                m = n - 1
            if m == l:
                break
            sweeps += 1
            if sweeps > max_sweeps:
                raise RuntimeError("QL iteration failed to converge")
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = np.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + np.copysign(r, g))
            s = c = 1.0
            p = 0.0
            underflow = False
            for i in range(m - 1, l - 1, -1):
                f = s * e[i]
                b = c * e[i]
                r = np.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                lo, hi = Qt[i], Qt[i + 1]
                np.multiply(lo, s, out=scratch)
                scratch += c * hi
                np.multiply(lo, c, out=lo)
                lo -= s * hi
                hi[:] = scratch
            if underflow:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return d, np.ascontiguousarray(Qt.T)


def spectrum_oracle(Y):
    """Full eigendecomposition of a symmetric matrix, values descending.

    Classic two-stage textbook route (Householder reduction, then QL with
    implicit shifts); shares no code with the LAPACK-backed production path.
    Returns ``(values, vectors)`` with eigenvectors in matching columns.
    """
    Y = np.asarray(Y, dtype=float)
    if Y.ndim != 2 or Y.shape[0] != Y.shape[1]:
        raise InvalidParams("need a square matrix")
    if not np.allclose(Y, Y.T, atol=1e-12 * max(1.0, float(np.max(np.abs(Y))))):
        raise InvalidParams("need a symmetric matrix")
    d, e, Q = _tridiagonalize((Y + Y.T) / 2.0)
    values, vectors = _ql_implicit_shift(d, e, Q)
    order = np.argsort(values)[::-1]
    return values[order], vectors[:, order]


def principal_angle(U, V):
    """Largest principal angle (radians) between two orthonormal column spans.

    Sine-based formulation: the singular values of ``(I - V V^T) U`` are the
    sines of the principal angles, which stays accurate for tiny angles where
    the cosine formulation saturates at sqrt(machine eps).
    """
    U = np.asarray(U)
    V = np.asarray(V)
    s = np.linalg.svd(U - V @ (V.T @ U), compute_uv=False)
    return float(np.arcsin(np.clip(np.max(s), 0.0, 1.0)))


def ks_statistic(samples, cdf):
    """Kolmogorov-Smirnov distance between a sample and a reference CDF."""
    x = np.sort(np.asarray(samples, dtype=float))
    n = x.size
    F = cdf(x)
    d_plus = np.max(np.arange(1, n + 1) / n - F)
    d_minus = np.max(F - np.arange(0, n) / n)
    return float(max(d_plus, d_minus))


def so2_trace_cdf(t):
    """CDF of the trace of a Haar-uniform SO(2) rotation (i.e. of 2 cos theta)."""
    t = np.clip(np.asarray(t, dtype=float), -2.0, 2.0)
    return 1.0 - np.arccos(t / 2.0) / np.pi


def perturb_within(reference, radius, rng):
    """Random stack whose dist_inf to the reference is at most ``radius``.

    Kicks every block along a random tangent direction with length up to
    0.95 * radius and retracts; rejection-samples the (rare) draws where the
    aligned per-block distance still exceeds the radius.
    """
    from .rotgroup import dist_inf, qr_retract, random_tangent

    n = reference.shape[0]
    for _ in range(100):
        V = random_tangent(reference, rng)
        norms = np.linalg.norm(V, axis=(-2, -1), keepdims=True)
        target = rng.uniform(0.2, 0.95, size=(n, 1, 1)) * radius
        X = qr_retract(reference, V * (target / np.maximum(norms, 1e-300)), 1.0)
        if dist_inf(X, reference) <= radius:
            return X
    raise RuntimeError("perturbation sampler failed to meet the radius bound")
