"""Brascamp-Lieb data, the two objectives, and feasibility screening."""

import enum
import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import scipy.linalg as sla

from .errors import (
    DimensionMismatch,
    NegativeExponent,
    NotPositiveDefinite,
    RankDeficient,
    ScalingViolation,
    SingularAggregate,
)
from .spd import as_spd, cholesky, log_det, symmetrize

RANK_TOL = 1e-10


def numerical_rank(A, rel_tol=RANK_TOL):
    """Rank of ``A`` counting singular values above ``rel_tol * s_max``."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if A.size == 0:
        return 0
    s = np.linalg.svd(A, compute_uv=False)
    if s[0] == 0.0:
        return 0
    return int(np.sum(s > rel_tol * s[0]))


def _as_fraction(value, index):
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return Fraction(int(value))
    if isinstance(value, tuple) and len(value) == 2:
        return Fraction(int(value[0]), int(value[1]))
    if isinstance(value, str):
        return Fraction(value)
    raise TypeError(
        f"exponent p_{index} must be exact (Fraction, int, 'a/b' or (num, den)); "
        f"got {value!r}. Floats are rejected because the operator-scaling "
        "reduction needs integer numerators and a common denominator."
    )


@dataclass(frozen=True, eq=False)
class BLDatum:
    """A datum ``(B, p)``: maps ``B_j`` of shape ``n_j x n`` and exact
    non-negative exponents ``p_j``.

    Construction only checks shapes; use :func:`validate_datum` for rank,
    sign and scaling checks.
    """

    n: int
    maps: tuple
    p: tuple

    def __post_init__(self):
        n = int(self.n)
        if n < 1:
            raise DimensionMismatch(f"n must be positive, got {n}")
        maps = []
        for j, B in enumerate(self.maps):
            B = np.array(B, dtype=float)
            if B.ndim == 1:
                B = B[None, :]
            if B.ndim != 2 or B.shape[1] != n or not 1 <= B.shape[0] <= n:
                raise DimensionMismatch(
                    f"B_{j} must have shape n_j x {n} with 1 <= n_j <= {n}, got {B.shape}"
                )
            if not np.all(np.isfinite(B)):
                raise ValueError(f"B_{j} has non-finite entries")
            B.setflags(write=False)
            maps.append(B)
        p = tuple(_as_fraction(v, j) for j, v in enumerate(self.p))
        if not maps:
            raise DimensionMismatch("a datum needs at least one map")
        if len(p) != len(maps):
            raise DimensionMismatch(f"{len(maps)} maps but {len(p)} exponents")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "maps", tuple(maps))
        object.__setattr__(self, "p", p)

    @property
    def m(self):
        return len(self.maps)

    @property
    def dims(self):
        return tuple(B.shape[0] for B in self.maps)

    @property
    def denominator(self):
        """Least common denominator ``c`` of the exponents."""
        return math.lcm(*(q.denominator for q in self.p))

    @property
    def numerators(self):
        """Integers ``c_j`` with ``p_j = c_j / c``."""
        c = self.denominator
        return tuple(int(q * c) for q in self.p)

    @property
    def weights(self):
        return np.array([float(q) for q in self.p])

    def scaling_sum(self):
        return sum((q * nj for q, nj in zip(self.p, self.dims)), Fraction(0))

    def to_json(self):
        c = self.denominator
        return {
            "n": self.n,
            "maps": [B.tolist() for B in self.maps],
            "p": [{"num": cj, "den": c} for cj in self.numerators],
        }


def datum_from_json(obj):
    """Build a datum from the JSON schema
    ``{"n": int, "maps": [[[row], ...], ...], "p": [{"num": int, "den": int}, ...]}``."""
    if not isinstance(obj, dict):
        raise ValueError("datum JSON must be an object")
    missing = {"n", "maps", "p"} - obj.keys()
    if missing:
        raise ValueError(f"datum JSON is missing keys: {sorted(missing)}")
    n = obj["n"]
    if not isinstance(n, int) or isinstance(n, bool):
        raise ValueError(f"'n' must be an integer, got {n!r}")
    p = []
    for j, entry in enumerate(obj["p"]):
        if not isinstance(entry, dict) or set(entry) != {"num", "den"}:
            raise ValueError(
                f"p[{j}] must be {{'num': int, 'den': int}}, got {entry!r}; decimal "
                "exponents are not accepted, the reduction needs integer c_j and c"
            )
        num, den = entry["num"], entry["den"]
        if not all(isinstance(v, int) and not isinstance(v, bool) for v in (num, den)):
            raise ValueError(f"p[{j}] num/den must be integers, got {entry!r}")
        if den <= 0:
            raise ValueError(f"p[{j}] has non-positive denominator {den}")
        p.append(Fraction(num, den))
    maps = obj["maps"]
    if not isinstance(maps, list):
        raise ValueError("'maps' must be a list of matrices")
    return BLDatum(n, tuple(maps), tuple(p))


def load_datum(path):
    with open(path) as fh:
        return datum_from_json(json.load(fh))


def validate_datum(d):
    """Return ``d`` if every exponent is non-negative, every map is
    surjective and ``sum_j p_j n_j = n`` holds exactly; raise otherwise."""
    for j, q in enumerate(d.p):
        if q < 0:
            raise NegativeExponent(j, q)
    for j, B in enumerate(d.maps):
        r = numerical_rank(B)
        if r < B.shape[0]:
            raise RankDeficient(j, r, B.shape[0])
    total = d.scaling_sum()
    if total != d.n:
        raise ScalingViolation(total, d.n)
    return d


def _check_tuple(d, A):
    if len(A) != d.m:
        raise DimensionMismatch(f"expected {d.m} blocks, got {len(A)}")
    out = []
    for j, (Aj, nj) in enumerate(zip(A, d.dims)):
        Aj = as_spd(np.atleast_2d(Aj), name=f"A_{j}")
        if Aj.shape[0] != nj:
            raise DimensionMismatch(f"A_{j} must be {nj}x{nj}, got {Aj.shape}")
        out.append(Aj)
    return out


def _check_x(d, X):
    X = as_spd(X, name="X")
    if X.shape[0] != d.n:
        raise DimensionMismatch(f"X must be {d.n}x{d.n}, got {X.shape}")
    return X


def lieb_aggregate(d, A):
    """``M = sum_j p_j B_j^T A_j B_j``."""
    return symmetrize(sum(float(q) * B.T @ Aj @ B for q, B, Aj in zip(d.p, d.maps, A)))


def log_bl_objective(d, A):
    """``log BL(B, p; A) = (sum_j p_j log det A_j - log det M) / 2``."""
    A = _check_tuple(d, A)
    M = lieb_aggregate(d, A)
    try:
        ld_M = log_det(M)
    except NotPositiveDefinite as exc:
        raise SingularAggregate(
            "sum_j p_j B_j^T A_j B_j is singular (smallest eigenvalue "
            f"{exc.min_eigenvalue:.3g})"
        ) from None
    num = sum(float(q) * log_det(Aj) for q, Aj in zip(d.p, A) if q != 0)
    return 0.5 * (num - ld_M)


def f_objective(d, X):
    """``F(X) = log det X - sum_j p_j log det(B_j X B_j^T)``."""
    X = _check_x(d, X)
    val = log_det(X)
    for q, B in zip(d.p, d.maps):
        if q != 0:
            val -= float(q) * log_det(symmetrize(B @ X @ B.T))
    return val


def projected_sum(d, X):
    """``sum_j p_j B_j^T (B_j X B_j^T)^{-1} B_j``: the right-hand side of the
    stationarity equation, and the Lieb aggregate of the extracted tuple."""
    X = _check_x(d, X)
    total = np.zeros((d.n, d.n))
    for q, B in zip(d.p, d.maps):
        if q == 0:
            continue
        L = cholesky(symmetrize(B @ X @ B.T), "B_j X B_j^T")
        W = sla.solve_triangular(L, B, lower=True)
        total += float(q) * (W.T @ W)
    return symmetrize(total)


def f_euclidean_gradient(d, X):
    """Euclidean gradient ``X^{-1} - sum_j p_j B_j^T (B_j X B_j^T)^{-1} B_j``."""
    X = _check_x(d, X)
    L = cholesky(X, "X")
    Xinv = sla.cho_solve((L, True), np.eye(d.n))
    return symmetrize(Xinv - projected_sum(d, X))


class Verdict(enum.Enum):
    CONSISTENT_WITH_FEASIBLE = "ConsistentWithFeasible"
    INFEASIBLE_WITNESS = "InfeasibleWitness"
    SCALING_VIOLATION = "ScalingViolation"
    RANK_DEFICIENT = "RankDeficient"


@dataclass
class FeasibilityReport:
    verdict: Verdict
    witness: np.ndarray = None
    checked_subspaces: int = 0
    seed: int = None
    detail: dict = field(default_factory=dict)

    @property
    def ok(self):
        return self.verdict is Verdict.CONSISTENT_WITH_FEASIBLE

    def to_json(self):
        return {
            "verdict": self.verdict.value,
            "witness": None if self.witness is None else self.witness.tolist(),
            "checked_subspaces": self.checked_subspaces,
            "seed": self.seed,
            "detail": self.detail,
        }


def _orth(V):
    """Orthonormal basis of the column span of ``V``."""
    if V.size == 0:
        return V
    return sla.orth(V, rcond=RANK_TOL)


def _candidate_subspaces(d, coord_dim_cap, random_subspaces, rng):
    n = d.n
    for k in range(1, min(coord_dim_cap, n - 1) + 1):
        for idx in itertools.combinations(range(n), k):
            yield "coordinate", np.eye(n)[:, list(idx)]
    kernels = []
    for j, B in enumerate(d.maps):
        K = sla.null_space(B, rcond=RANK_TOL)
        if K.shape[1] > 0:
            kernels.append((j, B))
            yield f"ker B_{j}", K
    for (i, Bi), (j, Bj) in itertools.combinations(kernels, 2):
        K = sla.null_space(np.vstack([Bi, Bj]), rcond=RANK_TOL)
        if K.shape[1] > 0:
            yield f"ker B_{i} & ker B_{j}", K
    for k in range(1, n):
        for _ in range(random_subspaces):
            Q, _ = np.linalg.qr(rng.standard_normal((n, k)))
            yield "random", Q


def feasibility_screen(d, random_subspaces=8, seed=0, coord_dim_cap=3):
    """One-sided screen for feasibility.

    Checks ``n = sum_j p_j n_j`` exactly and the subspace inequality
    ``dim V <= sum_j p_j dim(B_j V)`` on coordinate subspaces (up to
    ``coord_dim_cap``), kernels of the maps, pairwise kernel intersections and
    ``random_subspaces`` random subspaces per dimension. A passing report does
    not prove feasibility.
    """
    for j, q in enumerate(d.p):
        if q < 0:
            raise NegativeExponent(j, q)
    for j, B in enumerate(d.maps):
        r = numerical_rank(B)
        if r < B.shape[0]:
            return FeasibilityReport(
                Verdict.RANK_DEFICIENT, seed=seed, detail={"map": j, "rank": r}
            )
    total = d.scaling_sum()
    if total != d.n:
        return FeasibilityReport(
            Verdict.SCALING_VIOLATION,
            seed=seed,
            detail={"sum_p_n": str(total), "n": d.n},
        )
    rng = np.random.default_rng(seed)
    checked = 0
    for kind, V in _candidate_subspaces(d, coord_dim_cap, random_subspaces, rng):
        V = _orth(V)
        k = V.shape[1]
        checked += 1
        images = [numerical_rank(B @ V) for B in d.maps]
        bound = sum((q * r for q, r in zip(d.p, images)), Fraction(0))
        if k > bound:
            return FeasibilityReport(
                Verdict.INFEASIBLE_WITNESS,
                witness=V,
                checked_subspaces=checked,
                seed=seed,
                detail={
                    "kind": kind,
                    "dim_V": k,
                    "image_dims": images,
                    "bound": str(bound),
                },
            )
    return FeasibilityReport(
        Verdict.CONSISTENT_WITH_FEASIBLE, checked_subspaces=checked, seed=seed
    )


# Reference data used across tests, the CLI docs and the verification harness.


def hoelder_datum():
    return BLDatum(2, (np.eye(2), np.eye(2)), (Fraction(1, 2), Fraction(1, 2)))


def loomis_whitney_datum():
    return BLDatum(2, ([[1.0, 0.0]], [[0.0, 1.0]]), (Fraction(1), Fraction(1)))


def young_triple_datum():
    third = Fraction(2, 3)
    return BLDatum(2, ([[1.0, 0.0]], [[0.0, 1.0]], [[1.0, 1.0]]), (third, third, third))


def collapse_datum():
    return BLDatum(2, ([[1.0, 0.0]], [[1.0, 0.0]]), (Fraction(1), Fraction(1)))
