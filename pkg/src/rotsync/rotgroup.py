"""Primitives for the rotation group SO(d) and the product manifold SO(d)^n.

Conventions used throughout the library:

- A rotation block is a ``(d, d)`` float array ``R`` with ``R.T @ R = I``
  and ``det(R) = +1``.
- A rotation stack is an ``(n, d, d)`` array of blocks, one per node.
- The tangent space at ``X`` is ``{X @ S : S skew-symmetric}``.
- All functions here are pure and batch-aware: they accept a single block
  or a stack of blocks wherever the math extends blockwise.

Distances between stacks are measured after removing the global rotation
ambiguity: ``align`` finds the rotation ``R`` minimizing ``||X - Y R||_F``
and every ``dist*`` function reuses that same ``R``.
"""

import warnings

import numpy as np

from .errors import DegenerateProjection, RankDeficient

# Tolerances, sized for double precision at d <= 3, n <= 2000.
ORTHOGONALITY_TOL = 1e-10
SKEW_TOL = 1e-12
SINGULARITY_TOL = 1e-12
DEGENERACY_TOL = 1e-12


def _transpose(A):
    return np.swapaxes(A, -2, -1)


def is_rotation(R, tol=ORTHOGONALITY_TOL):
    """True where R.T @ R = I and det(R) = 1, both within tol (Frobenius)."""
    R = np.asarray(R)
    d = R.shape[-1]
    gram_err = np.linalg.norm(_transpose(R) @ R - np.eye(d), axis=(-2, -1))
    det_err = np.abs(np.linalg.det(R) - 1.0)
    return (gram_err <= tol) & (det_err <= tol)


def project_so(M):
    """Project onto SO(d): the rotation nearest to M in Frobenius norm.

    Computed from the SVD ``M = U diag(s) V^T`` (singular values descending)
    as ``U V^T``; when that product has determinant -1 the sign of the last
    column of ``U`` is reversed first. Batch-aware over leading axes.

    Warns ``DegenerateProjection`` when the determinant correction fires and
    the two smallest singular values coincide within 1e-12: the minimizer is
    then non-unique and one valid choice is returned.
    """
    M = np.asarray(M, dtype=float)
    if not np.all(np.isfinite(M)):
        raise ValueError("projection input must be finite")
    U, s, Vt = np.linalg.svd(M)
    flip = (np.linalg.det(U) * np.linalg.det(Vt)) < 0
    degenerate = flip & (s[..., -2] - s[..., -1] <= DEGENERACY_TOL)
    if np.any(degenerate):
        warnings.warn(
            "nearest rotation is not unique; returning one minimizer",
            DegenerateProjection,
            stacklevel=2,
        )
    if np.any(flip):
        U = U.copy()
        U[..., :, -1] *= np.where(flip, -1.0, 1.0)[..., None]
    return U @ Vt


def tangent_project(X, B):
    """Project the ambient matrix B onto the tangent space of SO(d) at X.

    Returns ``X (X^T B - B^T X) / 2``, i.e. X times the skew part of X^T B.
    Batch-aware; idempotent on tangent vectors.
    """
    XtB = _transpose(X) @ B
    return X @ ((XtB - _transpose(XtB)) / 2.0)


def qr_retract(X, V, mu):
    """Retract the tangent step -mu*V at X back onto SO(d).

    Returns the Q-factor of the QR decomposition of ``X - mu*V`` under the
    convention that the R-factor has positive diagonal. For X in SO(d) and V
    tangent at X the result is again in SO(d), and mu = 0 returns X (up to
    roundoff). Batch-aware.

    Raises ``RankDeficient`` when ``X - mu*V`` is numerically singular,
    which signals that mu is far too large for the data.
    """
    M = X - mu * V
    Q, R = np.linalg.qr(M)
    diag = np.diagonal(R, axis1=-2, axis2=-1)
    if np.any(np.abs(diag) <= SINGULARITY_TOL):
        raise RankDeficient("retraction input is singular; reduce the step size")
    signs = np.where(diag < 0, -1.0, 1.0)
    return Q * signs[..., None, :]


def random_rotation(d, rng, size=None):
    """Draw Haar-uniform rotations from SO(d).

    QR of a standard Gaussian matrix with the R-diagonal made positive gives
    a Haar-distributed orthogonal matrix; the determinant is then fixed to +1
    by flipping the sign of the last column where needed.

    Returns a ``(d, d)`` block, or a ``(size, d, d)`` stack when size is given.
    """
    if d < 2:
        raise ValueError("dimension must be at least 2")
    shape = (d, d) if size is None else (int(size), d, d)
    Q, R = np.linalg.qr(rng.standard_normal(shape))
    diag = np.diagonal(R, axis1=-2, axis2=-1)
    Q = Q * np.where(diag < 0, -1.0, 1.0)[..., None, :]
    neg = np.linalg.det(Q) < 0
    if size is None:
        if neg:
            Q[:, -1] *= -1.0
    elif np.any(neg):
        Q[neg, :, -1] *= -1.0
    return Q


def random_tangent(X, rng):
    """Random tangent vector at X: X times a Gaussian skew matrix, blockwise."""
    X = np.asarray(X)
    A = rng.standard_normal(X.shape)
    return X @ ((A - _transpose(A)) / 2.0)


def align(X, Y):
    """Optimal global rotation removing the gauge ambiguity between stacks.

    Returns ``(R, Y @ R)`` where ``R = argmin_{R in SO(d)} ||X - Y R||_F``,
    computed as the SO(d) projection of ``sum_i Y_i^T X_i``.

    Convention: the optimal rotation right-multiplies the *second* argument.
    This makes every ``dist*`` function invariant under a common right
    rotation of either stack, which is the property all call sites rely on.
    """
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if X.shape != Y.shape:
        raise ValueError(f"stack shapes differ: {X.shape} vs {Y.shape}")
    C = np.einsum("nij,nik->jk", Y, X)
    R = project_so(C)
    return R, Y @ R


def aligned_block_norms(X, Y):
    """Frobenius norm of each block difference after optimal alignment."""
    _, Ya = align(X, Y)
    return np.linalg.norm(np.asarray(X) - Ya, axis=(-2, -1))


def distances(X, Y):
    """All three gauge-invariant distances, sharing one alignment.

    Returns ``(dist, dist1, dist_inf)``: the l2, l1 and max aggregation of
    the per-block Frobenius norms ``||X_i - Y_i R||_F``.
    """
    norms = aligned_block_norms(X, Y)
    return (
        float(np.sqrt(np.sum(norms**2))),
        float(np.sum(norms)),
        float(np.max(norms)),
    )


def dist(X, Y):
    """Frobenius distance between stacks, up to a global rotation."""
    return distances(X, Y)[0]


def dist1(X, Y):
    """Sum of per-block Frobenius distances, up to a global rotation."""
    return distances(X, Y)[1]


def dist_inf(X, Y):
    """Largest per-block Frobenius distance, up to a global rotation."""
    return distances(X, Y)[2]
