"""Operator-scaling instance of a rational datum and its capacity.

With ``p_j = c_j / c`` the datum becomes ``m' = sum_j c_j`` Kraus operators
``T_i`` of shape ``(n c) x n``, one per copy of a map: copy ``i`` belongs to
map ``delta(i)`` and ``T_i`` carries ``B_delta(i)`` in row-block ``i``, zeros
elsewhere. The operator is ``T(X) = sum_i T_i^T X T_i`` from ``S^{nc}`` to
``S^n`` and its capacity equals ``1 / BL(B, p)^2``.
"""

import os
from dataclasses import dataclass

import numpy as np

from .datum import validate_datum
from .errors import DimensionCapExceeded, NotConverged, NotPositiveDefinite, SingularOperator
from .solvers import SolverConfig
from .spd import log_det, spd_power, symmetrize

DEFAULT_DIM_CAP = 4096
DEFAULT_CAPACITY_TOL = 1e-8


def dim_cap_from_env():
    value = os.environ.get("BLGEO_DIM_CAP")
    return DEFAULT_DIM_CAP if not value else int(value)


@dataclass(frozen=True, eq=False)
class KrausSet:
    input_dim: int
    output_dim: int
    kraus: np.ndarray  # shape (m', input_dim, output_dim)
    c: int
    copy_map: tuple  # delta, 0-based
    row_offsets: tuple

    @property
    def num_ops(self):
        return self.kraus.shape[0]

    def apply(self, X):
        """``T(X) = sum_i T_i^T X T_i``."""
        return symmetrize(np.einsum("iab,ac,icd->bd", self.kraus, X, self.kraus))

    def adjoint(self, Y):
        """``T*(Y) = sum_i T_i Y T_i^T``."""
        return symmetrize(np.einsum("iab,bc,idc->ad", self.kraus, Y, self.kraus))

    def to_json(self):
        return {
            "input_dim": self.input_dim,
            "output_dim": self.output_dim,
            "c": self.c,
            "num_ops": self.num_ops,
            "copy_map": list(self.copy_map),
            "row_offsets": list(self.row_offsets),
            "kraus": self.kraus.tolist(),
        }


def build_scaling_operator(d, dim_cap=DEFAULT_DIM_CAP):
    validate_datum(d)
    c = d.denominator
    dim = d.n * c
    if dim > dim_cap:
        raise DimensionCapExceeded(dim, dim_cap)
    copy_map = tuple(j for j, cj in enumerate(d.numerators) for _ in range(cj))
    kraus = np.zeros((len(copy_map), dim, d.n))
    offsets = []
    row = 0
    for i, j in enumerate(copy_map):
        nj = d.dims[j]
        kraus[i, row:row + nj, :] = d.maps[j]
        offsets.append(row)
        row += nj
    # sum_j c_j n_j = n c holds by validation
    assert row == dim
    kraus.setflags(write=False)
    return KrausSet(dim, d.n, kraus, c, copy_map, tuple(offsets))


@dataclass
class CapacityResult:
    log_cap: float
    ds_residual: float
    left_scaling: np.ndarray
    right_scaling: np.ndarray
    iterations: int
    converged: bool
    trace: list = None

    def to_json(self):
        return {
            "log_cap": self.log_cap,
            "ds_residual": self.ds_residual,
            "iterations": self.iterations,
            "converged": self.converged,
            "left_scaling": self.left_scaling.tolist(),
            "right_scaling": self.right_scaling.tolist(),
        }


def scaled_gram_sums(k, L, R):
    """``(sum_i That_i^T That_i, sum_i That_i That_i^T)`` for ``That_i = L T_i R``."""
    That = np.einsum("ab,ibc,cd->iad", L, k.kraus, R)
    right = symmetrize(np.einsum("iab,iac->bc", That, That))
    left = symmetrize(np.einsum("iab,icb->ac", That, That))
    return right, left


def ds_residual(k, L, R):
    """Distance to doubly-stochastic position.

    The traces of the two Gram sums always agree, so with output dimension
    ``n`` and input dimension ``n c`` the reachable target is
    ``sum That^T That = I_n`` and ``c * sum That That^T = I_{nc}``.
    """
    right, left = scaled_gram_sums(k, L, R)
    return max(
        float(np.linalg.norm(right - np.eye(k.output_dim))),
        float(np.linalg.norm(k.c * left - np.eye(k.input_dim))),
    )


def _capacity_value(k, L):
    X = symmetrize(L.T @ L)
    X = X * np.exp(-log_det(X) / k.input_dim)
    return log_det(k.apply(X) / k.c)


def capacity(k, cfg=None):
    """Alternating right/left normalization (operator Sinkhorn).

    Right step: ``R <- R N^{-1/2}`` with ``N = sum That^T That``.
    Left step: ``L <- (c P)^{-1/2} L`` with ``P = sum That That^T``.
    ``log_cap`` is ``log det(T(X) / c)`` at ``X = L^T L`` scaled to det 1.
    """
    cfg = cfg or SolverConfig(tol=DEFAULT_CAPACITY_TOL)
    L = np.eye(k.input_dim)
    R = np.eye(k.output_dim)
    try:
        spd_power(k.apply(np.eye(k.input_dim)), -0.5)
        spd_power(k.adjoint(np.eye(k.output_dim)), -0.5)
    except NotPositiveDefinite as exc:
        raise SingularOperator(f"Kraus operators are not jointly full rank: {exc}") from None
    trace = []
    res = ds_residual(k, L, R)
    it = 0
    while res > cfg.tol and it < cfg.max_iter:
        right, _ = scaled_gram_sums(k, L, R)
        R = R @ spd_power(right, -0.5)
        _, left = scaled_gram_sums(k, L, R)
        L = spd_power(k.c * left, -0.5) @ L
        # rescale to keep entries O(1); L T R is unchanged
        s = np.exp(np.linalg.slogdet(L)[1] / k.input_dim)
        L, R = L / s, R * s
        it += 1
        res = ds_residual(k, L, R)
        trace.append((it, res))
    result = CapacityResult(
        log_cap=_capacity_value(k, L),
        ds_residual=res,
        left_scaling=L,
        right_scaling=R,
        iterations=it,
        converged=res <= cfg.tol,
        trace=trace,
    )
    if not result.converged:
        raise NotConverged(
            f"operator scaling stopped at ds_residual {res:.3g} after {it} iterations",
            result,
        )
    return result


def log_bl_from_capacity(r):
    """``log BL = -log_cap / 2``."""
    if not r.converged:
        raise NotConverged("capacity result is not converged", r)
    return -0.5 * r.log_cap + 0.0  # no negative zero
