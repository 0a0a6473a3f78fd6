"""Maximize ``F(X) = log det X - sum_j p_j log det(B_j X B_j^T)``.

Two ascent methods share the same result type:

* ``solve_fixed_point`` iterates ``M <- sum_j p_j B_j^T (B_j M^{-1} B_j^T)^{-1} B_j``
  with ``X = M^{-1}``; the undamped map is an alternating maximization and
  increases ``F``, the damping guard only kicks in on round-off.
* ``solve_geodesic_ascent`` moves along the geodesic generated by the
  Riemannian gradient, ``X <- X^{1/2} exp(eta S) X^{1/2}`` with
  ``S = X^{1/2} G X^{1/2}``.

Iterates are renormalized to ``det X = 1``; on data with
``sum_j p_j n_j = n`` the objective is invariant along ``X -> lambda X``.
"""

import enum
import logging
from dataclasses import dataclass, field

import numpy as np

from .datum import _check_x, f_euclidean_gradient, f_objective, projected_sum
from .errors import Diverged, NotConverged, NotPositiveDefinite
from .spd import cholesky, spd_inv, symmetrize

log = logging.getLogger(__name__)

# per-step slack for monotonicity checks, absorbs round-off in F
MONOTONE_SLACK = 1e-12


class Method(enum.Enum):
    FIXED_POINT = "fixed-point"
    GEODESIC = "geodesic"
    CAPACITY = "capacity"


@dataclass(frozen=True)
class FixedStep:
    eta: float = 0.5


@dataclass(frozen=True)
class GeodesicArmijo:
    beta: float = 0.5
    sigma: float = 1e-4
    eta0: float = 1.0


@dataclass(frozen=True)
class SolverConfig:
    tol: float = 1e-10
    max_iter: int = 10000
    damping: float = 1.0
    step_rule: object = field(default_factory=GeodesicArmijo)
    value_drift: float = 1e3
    iterate_norm: float = 1e14
    seed: int = 0

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if not 0 < self.damping <= 1:
            raise ValueError("damping must lie in (0, 1]")


@dataclass
class SolveResult:
    log_bl: float
    optimizer_x: np.ndarray
    maximizer_a: list
    residual: float
    iterations: int
    converged: bool
    diverged: bool
    method: Method
    trace: list = field(default_factory=list)

    def to_json(self):
        return {
            "method": self.method.value,
            "log_bl": self.log_bl,
            "converged": self.converged,
            "diverged": self.diverged,
            "residual": self.residual,
            "iterations": self.iterations,
            "optimizer_x": self.optimizer_x.tolist(),
            "maximizer_a": [A.tolist() for A in self.maximizer_a],
            "trace": [list(t) for t in self.trace],
        }


def stationarity_residual(d, X):
    """``||X^{-1} - sum_j p_j B_j^T (B_j X B_j^T)^{-1} B_j||_F / ||X^{-1}||_F``."""
    X = _check_x(d, X)
    Xinv = spd_inv(X)
    return float(np.linalg.norm(Xinv - projected_sum(d, X)) / np.linalg.norm(Xinv))


def extract_maximizer(d, X):
    """Gaussian tuple ``A_j = (B_j X B_j^T)^{-1}``."""
    X = _check_x(d, X)
    return [spd_inv(symmetrize(B @ X @ B.T)) for B in d.maps]


def _normalize(X):
    n = X.shape[0]
    L = cholesky(X, "iterate")
    logdet = 2.0 * np.sum(np.log(np.diag(L)))
    return symmetrize(X * np.exp(-logdet / n))


def _condition(X):
    w = np.linalg.eigvalsh(X)
    return np.inf if w[0] <= 0 else float(w[-1] / w[0])


def _initial(d, x0):
    X = np.eye(d.n) if x0 is None else _check_x(d, x0)
    return _normalize(X)


def _finish(d, X, F, res, k, converged, method, trace):
    return SolveResult(
        log_bl=0.5 * F,
        optimizer_x=X,
        maximizer_a=extract_maximizer(d, X),
        residual=res,
        iterations=k,
        converged=converged,
        diverged=False,
        method=method,
        trace=trace,
    )


def _diverged(d, X, F, res, k, method, trace, reason, **evidence):
    result = SolveResult(
        log_bl=0.5 * F,
        optimizer_x=X,
        maximizer_a=[],
        residual=res,
        iterations=k,
        converged=False,
        diverged=True,
        method=method,
        trace=trace,
    )
    evidence["reason"] = reason
    return Diverged(f"{method.value} diverged after {k} iterations: {reason}", result, evidence)


def solve_fixed_point(d, cfg=None, x0=None):
    """Damped fixed-point iteration on the stationarity equation.

    Raises ``Diverged`` when the aggregate map becomes singular, the iterate
    condition number exceeds ``cfg.iterate_norm`` or ``F`` drifts by more
    than ``cfg.value_drift``; raises ``NotConverged`` when ``max_iter`` is
    exhausted or the damping collapses.
    """
    cfg = cfg or SolverConfig()
    method = Method.FIXED_POINT
    X = _initial(d, x0)
    F = F0 = f_objective(d, X)
    M = spd_inv(X)
    alpha = cfg.damping
    trace = []
    for k in range(cfg.max_iter + 1):
        res = stationarity_residual(d, X)
        trace.append((k, F, res))
        if res <= cfg.tol:
            return _finish(d, X, F, res, k, True, method, trace)
        if k == cfg.max_iter:
            break
        rhs = projected_sum(d, X)
        while True:
            M_new = symmetrize((1.0 - alpha) * M + alpha * rhs)
            cond = _condition(M_new)
            if cond > cfg.iterate_norm:
                raise _diverged(
                    d, X, F, res, k, method, trace,
                    "aggregate map is singular or ill-conditioned",
                    condition_number=cond,
                )
            X_new = _normalize(spd_inv(M_new))
            F_new = f_objective(d, X_new)
            if F_new >= F - MONOTONE_SLACK:
                break
            alpha *= 0.5
            log.debug("fixed point: F decreased, damping halved to %g", alpha)
            if alpha < 1e-12:
                raise NotConverged(
                    f"damping collapsed at iteration {k}",
                    _finish(d, X, F, res, k, False, method, trace),
                )
        if F_new - F0 > cfg.value_drift:
            raise _diverged(
                d, X_new, F_new, res, k + 1, method, trace,
                "objective exceeded drift bound", value=F_new,
            )
        X, F = X_new, F_new
        M = spd_inv(X)
        alpha = min(cfg.damping, 2.0 * alpha)
    raise NotConverged(
        f"fixed point did not reach tol {cfg.tol} in {cfg.max_iter} iterations "
        f"(residual {res:.3g})",
        _finish(d, X, F, res, cfg.max_iter, False, method, trace),
    )


def _riemannian_norm(X, G):
    """Norm of the Riemannian gradient ``X G X`` in the metric at ``X``."""
    GX = G @ X
    return float(np.sqrt(max(np.trace(GX @ GX), 0.0)))


def _geodesic_step(Xh, S, eta):
    w, V = np.linalg.eigh(S)
    return symmetrize(Xh @ ((V * np.exp(eta * w)) @ V.T) @ Xh)


def solve_geodesic_ascent(d, cfg=None, x0=None):
    """Riemannian gradient ascent along geodesics.

    Stops when the stationarity residual is at most ``cfg.tol`` and the
    Riemannian gradient norm is at most ``cfg.tol * (1 + |F|)``.
    """
    cfg = cfg or SolverConfig()
    rule = cfg.step_rule
    method = Method.GEODESIC
    X = _initial(d, x0)
    F = F0 = f_objective(d, X)
    eta = rule.eta if isinstance(rule, FixedStep) else rule.eta0
    if not eta > 0:
        raise ValueError("step size must be positive")
    trace = []
    for k in range(cfg.max_iter + 1):
        G = f_euclidean_gradient(d, X)
        w, V = np.linalg.eigh(X)
        Xh = (V * np.sqrt(w)) @ V.T
        S = symmetrize(Xh @ G @ Xh)
        gnorm = float(np.linalg.norm(S))
        res = stationarity_residual(d, X)
        trace.append((k, F, res))
        if res <= cfg.tol and gnorm <= cfg.tol * (1.0 + abs(F)):
            return _finish(d, X, F, res, k, True, method, trace)
        if k == cfg.max_iter:
            break
        if isinstance(rule, FixedStep):
            X_new = _normalize(_geodesic_step(Xh, S, eta))
            F_new = f_objective(d, X_new)
        else:
            eta = rule.eta0
            while True:
                X_new = _normalize(_geodesic_step(Xh, S, eta))
                F_new = f_objective(d, X_new)
                gain = rule.sigma * eta * gnorm**2
                if F_new >= F + gain:
                    break
                # below round-off in F, accept steps that shrink the gradient
                if gain < 1e-14 * (1.0 + abs(F)) and F_new >= F - MONOTONE_SLACK:
                    if _riemannian_norm(X_new, f_euclidean_gradient(d, X_new)) < gnorm:
                        break
                eta *= rule.beta
                if eta < 1e-16:
                    raise NotConverged(
                        f"line search failed at iteration {k}",
                        _finish(d, X, F, res, k, False, method, trace),
                    )
        cond = _condition(X_new)
        if cond > cfg.iterate_norm:
            raise _diverged(
                d, X_new, F_new, res, k + 1, method, trace,
                "iterate condition number exceeded bound", condition_number=cond,
            )
        if F_new - F0 > cfg.value_drift:
            raise _diverged(
                d, X_new, F_new, res, k + 1, method, trace,
                "objective exceeded drift bound", value=F_new,
            )
        X, F = X_new, F_new
    raise NotConverged(
        f"geodesic ascent did not reach tol {cfg.tol} in {cfg.max_iter} iterations "
        f"(residual {res:.3g})",
        _finish(d, X, F, res, cfg.max_iter, False, method, trace),
    )
