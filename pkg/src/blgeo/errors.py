"""Exception hierarchy for blgeo."""


class BLGeoError(Exception):
    """Base class for all errors raised by blgeo."""


class DimensionMismatch(BLGeoError, ValueError):
    pass


class NotSymmetric(BLGeoError, ValueError):
    pass


class NotPositiveDefinite(BLGeoError, ValueError):
    def __init__(self, message, min_eigenvalue=None):
        super().__init__(message)
        self.min_eigenvalue = min_eigenvalue


class RankDeficient(BLGeoError, ValueError):
    def __init__(self, index, rank, rows):
        super().__init__(
            f"map B_{index} has rank {rank} < {rows} rows; it is not surjective"
        )
        self.index = index
        self.rank = rank
        self.rows = rows


class ScalingViolation(BLGeoError, ValueError):
    def __init__(self, total, n):
        super().__init__(f"sum_j p_j n_j = {total} but n = {n}")
        self.total = total
        self.n = n


class NegativeExponent(BLGeoError, ValueError):
    def __init__(self, index, value):
        super().__init__(f"exponent p_{index} = {value} is negative")
        self.index = index
        self.value = value


class SingularAggregate(BLGeoError, ArithmeticError):
    """sum_j p_j B_j^T A_j B_j is numerically singular."""


class DimensionCapExceeded(BLGeoError):
    def __init__(self, dim, cap):
        super().__init__(
            f"operator scaling instance needs input dimension n*c = {dim} > cap {cap}; "
            "the reduction grows with the exponents' common denominator "
            "(exponential in their bit length). Raise BLGEO_DIM_CAP to force it."
        )
        self.dim = dim
        self.cap = cap


class SingularOperator(BLGeoError, ArithmeticError):
    pass


class SolverFailure(BLGeoError):
    """Base for solver outcomes that carry a partial result."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class NotConverged(SolverFailure):
    @property
    def best_iterate(self):
        return getattr(self.result, "optimizer_x", None)

    @property
    def residual(self):
        if hasattr(self.result, "ds_residual"):
            return self.result.ds_residual
        return getattr(self.result, "residual", None)


class Diverged(SolverFailure):
    def __init__(self, message, result=None, evidence=None):
        super().__init__(message, result)
        self.evidence = evidence or {}
