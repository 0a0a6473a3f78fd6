"""Geometry of the positive-definite cone under the metric
``g_X(v, w) = Tr(X^{-1} v X^{-1} w)``.

Matrices are plain ``numpy`` arrays. Public functions validate their inputs
with :func:`as_spd` / :func:`as_symmetric`, which symmetrize small round-off
and reject anything farther from symmetric than ``sym_tol``.
"""

import numpy as np
import scipy.linalg as sla

from .errors import DimensionMismatch, NotPositiveDefinite, NotSymmetric

SYM_TOL = 1e-12


def _square(X, name="matrix"):
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] != X.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {X.shape}")
    return X


def symmetrize(X):
    return 0.5 * (X + X.T)


def as_symmetric(X, sym_tol=SYM_TOL, name="matrix"):
    """Return ``(X + X^T)/2`` after checking ``X`` is symmetric within
    ``sym_tol`` relative to its Frobenius norm."""
    X = _square(X, name)
    if not np.all(np.isfinite(X)):
        raise NotSymmetric(f"{name} has non-finite entries")
    asym = np.max(np.abs(X - X.T)) if X.size else 0.0
    scale = np.linalg.norm(X)
    if asym > sym_tol * scale:
        raise NotSymmetric(f"{name} is not symmetric (max |X - X^T| = {asym:.3g})")
    return symmetrize(X)


def _min_eig(X):
    return float(np.linalg.eigvalsh(X)[0]) if X.size else np.inf


def cholesky(X, name="matrix"):
    """Lower Cholesky factor; raises NotPositiveDefinite with the smallest
    eigenvalue as diagnostic."""
    try:
        return np.linalg.cholesky(X)
    except np.linalg.LinAlgError:
        lam = _min_eig(X)
        raise NotPositiveDefinite(
            f"{name} is not positive definite (smallest eigenvalue {lam:.3g})",
            min_eigenvalue=lam,
        ) from None


def as_spd(X, sym_tol=SYM_TOL, name="matrix"):
    """Validate and symmetrize a positive-definite matrix."""
    X = as_symmetric(X, sym_tol, name)
    cholesky(X, name)
    return X


def _check_same_dim(*mats):
    dims = {M.shape[0] for M in mats}
    if len(dims) > 1:
        raise DimensionMismatch(f"dimension mismatch: {sorted(dims)}")


def _eigh_spd(X):
    w, V = np.linalg.eigh(X)
    if w.size and w[0] <= 0:
        raise NotPositiveDefinite(
            f"matrix is not positive definite (smallest eigenvalue {w[0]:.3g})",
            min_eigenvalue=float(w[0]),
        )
    return w, V


def spd_power(X, t):
    """``X^t`` for SPD ``X`` and real ``t`` via symmetric eigendecomposition."""
    X = as_spd(X)
    w, V = _eigh_spd(X)
    return symmetrize((V * w**t) @ V.T)


def spd_sqrt(X):
    """Principal square root of an SPD matrix."""
    return spd_power(X, 0.5)


def spd_inv(X):
    X = as_spd(X)
    L = cholesky(X)
    return symmetrize(sla.cho_solve((L, True), np.eye(X.shape[0])))


def sym_expm(S):
    """Matrix exponential of a symmetric matrix (result is SPD)."""
    S = as_symmetric(S)
    w, V = np.linalg.eigh(S)
    return symmetrize((V * np.exp(w)) @ V.T)


def log_det(X):
    """``log det X`` from the Cholesky diagonal; never forms ``det X``."""
    X = as_spd(X)
    L = cholesky(X)
    return 2.0 * float(np.sum(np.log(np.diag(L))))


def geodesic(X, Y, t):
    """Point ``X #_t Y = X^{1/2} (X^{-1/2} Y X^{-1/2})^t X^{1/2}``."""
    X, Y = as_spd(X, name="X"), as_spd(Y, name="Y")
    _check_same_dim(X, Y)
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"t must lie in [0, 1], got {t}")
    w, V = _eigh_spd(X)
    Xh = (V * np.sqrt(w)) @ V.T
    Xih = (V / np.sqrt(w)) @ V.T
    inner = symmetrize(Xih @ Y @ Xih)
    wi, Vi = _eigh_spd(inner)
    return symmetrize(Xh @ ((Vi * wi**t) @ Vi.T) @ Xh)


def geometric_mean(P, Q):
    """Matrix geometric mean ``P # Q``, the geodesic midpoint."""
    return geodesic(P, Q, 0.5)


def metric_inner(X, v, w):
    """Riemannian inner product ``Tr(X^{-1} v X^{-1} w)`` at ``X``."""
    X = as_spd(X, name="X")
    v, w = as_symmetric(v, name="v"), as_symmetric(w, name="w")
    _check_same_dim(X, v, w)
    L = cholesky(X)
    Xiv = sla.cho_solve((L, True), v)
    Xiw = sla.cho_solve((L, True), w)
    return float(np.trace(Xiv @ Xiw))


def loewner_leq(P, Q, tol=0.0):
    """True iff ``P <= Q`` in Loewner order up to
    ``tol * (1 + ||Q - P||_F)`` on the smallest eigenvalue of ``Q - P``."""
    if tol < 0:
        raise ValueError("tol must be non-negative")
    P, Q = as_symmetric(P, name="P"), as_symmetric(Q, name="Q")
    _check_same_dim(P, Q)
    D = Q - P
    return _min_eig(D) >= -tol * (1.0 + np.linalg.norm(D))


def min_eigenvalue(S):
    return _min_eig(as_symmetric(S))
