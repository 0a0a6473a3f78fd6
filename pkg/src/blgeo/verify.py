"""Randomized property harness for the inequalities behind the solvers.

Every check draws sample ``i`` from ``numpy.random.default_rng([seed, i])`` so
reports are reproducible from ``(property, seed, samples, tolerance)`` and
samples can be evaluated in any order. A margin is a slack divided by
``1 + (Frobenius norms / magnitudes of the operands)``; a sample is a
violation when its margin is below ``-tolerance``.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .datum import BLDatum, f_euclidean_gradient, f_objective, log_bl_objective
from .spd import geodesic, geometric_mean, log_det, min_eigenvalue, spd_inv, symmetrize

PROFILES = {
    "default": {"condition_cap": 1e4, "tolerance": 1e-9},
    "stress": {"condition_cap": 1e8, "tolerance": 1e-6},
}


@dataclass
class PropertyReport:
    property_name: str
    samples: int
    violations: int
    worst_margin: float
    seed: int
    tolerance: float
    margins: np.ndarray = field(default=None, repr=False)

    @property
    def passed(self):
        return self.violations == 0

    def quantiles(self):
        if self.margins is None or len(self.margins) == 0:
            return {}
        q = np.quantile(self.margins, [0.0, 0.01, 0.5, 1.0])
        return {"min": q[0], "q01": q[1], "median": q[2], "max": q[3]}

    def to_json(self):
        return {
            "property": self.property_name,
            "samples": self.samples,
            "violations": self.violations,
            "worst_margin": self.worst_margin,
            "seed": self.seed,
            "tolerance": self.tolerance,
            "slack_quantiles": self.quantiles(),
        }


@dataclass(frozen=True)
class SpdSampler:
    """``Q diag(lam) Q^T`` with Haar-random ``Q`` and log-uniform ``lam``
    spanning at most ``condition_cap``, times a log-uniform overall scale."""

    dim: int
    condition_cap: float = 1e4
    seed: int = 0

    def draw(self, rng):
        Z = rng.standard_normal((self.dim, self.dim))
        Q, R = np.linalg.qr(Z)
        Q = Q * np.sign(np.diag(R))
        lam = self.condition_cap ** rng.uniform(0.0, 1.0, self.dim)
        scale = 10.0 ** rng.uniform(-1.0, 1.0)
        return symmetrize(scale * (Q * lam) @ Q.T)


def sample_rng(seed, index):
    return np.random.default_rng([seed, index])


def random_simple_datum(rng):
    """A generic datum with rational exponents in the interior of its
    Brascamp-Lieb polytope (so a Gaussian maximizer exists)."""
    family = rng.integers(4)
    if family == 0:
        n = int(rng.integers(2, 4))
        m = n + int(rng.integers(1, 4))
        maps = [rng.standard_normal((1, n)) for _ in range(m)]
        p = [Fraction(n, m)] * m
    elif family == 1:
        maps = [rng.standard_normal((2, 3)) for _ in range(4)]
        p = [Fraction(3, 8)] * 4
    elif family == 2:
        maps = [rng.standard_normal((1, 3)) for _ in range(3)] + [rng.standard_normal((2, 3))]
        p = [Fraction(1, 2)] * 3 + [Fraction(3, 4)]
    else:
        maps = [rng.standard_normal((1, 2)) for _ in range(3)]
        p = [Fraction(1, 2), Fraction(3, 4), Fraction(3, 4)]
    return BLDatum(maps[0].shape[1], tuple(maps), tuple(p))


def _report(name, margins, seed, tol):
    margins = np.asarray(margins, dtype=float)
    worst = float(margins.min()) if margins.size else 0.0
    return PropertyReport(
        property_name=name,
        samples=int(margins.size),
        violations=int(np.sum(margins < -tol)),
        worst_margin=worst,
        seed=seed,
        tolerance=tol,
        margins=margins,
    )


def _run(name, margin_fn, samples, seed, tol, workers=1):
    def one(i):
        return margin_fn(sample_rng(seed, i))

    if workers > 1 and samples > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            margins = list(pool.map(one, range(samples)))
    else:
        margins = [one(i) for i in range(samples)]
    return _report(name, margins, seed, tol)


def _fro(*mats):
    return sum(float(np.linalg.norm(M)) for M in mats)


def _congruence(B):
    B = np.atleast_2d(np.asarray(B, dtype=float))
    return lambda X: symmetrize(B @ X @ B.T)


def check_ando(sampler, B, samples, tol=1e-9, workers=1):
    """``Phi(P # Q) <= Phi(P) # Phi(Q)`` for ``Phi(X) = B X B^T``."""
    phi = _congruence(B)

    def margin(rng):
        P, Q = sampler.draw(rng), sampler.draw(rng)
        rhs = geometric_mean(phi(P), phi(Q))
        lhs = phi(geometric_mean(P, Q))
        return min_eigenvalue(rhs - lhs) / (1.0 + _fro(lhs, rhs))

    return _run("ando", margin, samples, sampler.seed, tol, workers)


def joint_map(maps):
    """``Phi(P_1, ..., P_m) = sum_j w_j B_j^T P_j B_j`` from ``(w_j, B_j)`` pairs."""
    maps = [(float(w), np.atleast_2d(np.asarray(B, dtype=float))) for w, B in maps]

    def phi(Ps):
        return symmetrize(sum(w * B.T @ P @ B for (w, B), P in zip(maps, Ps)))

    return phi


def datum_joint_maps(d):
    return list(zip(d.p, d.maps))


def check_joint_gm(samplers, maps, samples, tol=1e-9, workers=1):
    """``Phi(P # Q) <= Phi(P) # Phi(Q)`` for a jointly linear map, the mean
    taken blockwise on the left."""
    phi = joint_map(maps)
    seed = samplers[0].seed

    def margin(rng):
        Ps = [s.draw(rng) for s in samplers]
        Qs = [s.draw(rng) for s in samplers]
        Gs = [geometric_mean(P, Q) for P, Q in zip(Ps, Qs)]
        rhs = geometric_mean(phi(Ps), phi(Qs))
        lhs = phi(Gs)
        return min_eigenvalue(rhs - lhs) / (1.0 + _fro(lhs, rhs))

    return _run("joint_gm", margin, samples, seed, tol, workers)


def check_logdet_linearity(sampler, samples, tol=1e-9, workers=1):
    """Two-sided: margin is ``-|log det(X #_t Y) - (1-t) log det X - t log det Y|``."""

    def margin(rng):
        X, Y = sampler.draw(rng), sampler.draw(rng)
        t = rng.uniform()
        lx, ly = log_det(X), log_det(Y)
        dev = abs(log_det(geodesic(X, Y, t)) - (1 - t) * lx - t * ly)
        return -dev / (1.0 + abs(lx) + abs(ly))

    return _run("logdet_linearity", margin, samples, sampler.seed, tol, workers)


def check_maximal_characterization(sampler, B, samples, tol=1e-9):
    """``[[P, P#Q], [P#Q, Q]]`` is PSD, and stays PSD after applying
    ``Phi(X) = B X B^T`` blockwise. Returns two reports."""
    phi = _congruence(B)

    def margins(rng):
        P, Q = sampler.draw(rng), sampler.draw(rng)
        G = geometric_mean(P, Q)
        block = np.block([[P, G], [G, Q]])
        mapped = np.block([[phi(P), phi(G)], [phi(G), phi(Q)]])
        return (
            min_eigenvalue(block) / (1.0 + _fro(block)),
            min_eigenvalue(mapped) / (1.0 + _fro(mapped)),
        )

    pairs = [margins(sample_rng(sampler.seed, i)) for i in range(samples)]
    first = [a for a, _ in pairs]
    second = [b for _, b in pairs]
    return (
        _report("gm_maximal_block", first, sampler.seed, tol),
        _report("gm_block_transfer", second, sampler.seed, tol),
    )


def check_bl_concavity(d, samples, seed=0, condition_cap=1e4, tol=1e-9, workers=1):
    """Midpoint concavity of ``log BL(B, p; .)`` over tuple geodesics and of
    ``F`` over ``X # Y``. Returns ``(lieb_report, f_report)``."""
    block_samplers = [SpdSampler(nj, condition_cap, seed) for nj in d.dims]
    x_sampler = SpdSampler(d.n, condition_cap, seed)

    def lieb_margin(rng):
        Ps = [s.draw(rng) for s in block_samplers]
        Qs = [s.draw(rng) for s in block_samplers]
        Gs = [geometric_mean(P, Q) for P, Q in zip(Ps, Qs)]
        vp, vq, vg = (log_bl_objective(d, A) for A in (Ps, Qs, Gs))
        return (vg - 0.5 * (vp + vq)) / (1.0 + abs(vp) + abs(vq))

    def f_margin(rng):
        X, Y = x_sampler.draw(rng), x_sampler.draw(rng)
        fx, fy = f_objective(d, X), f_objective(d, Y)
        fg = f_objective(d, geometric_mean(X, Y))
        return (fg - 0.5 * (fx + fy)) / (1.0 + abs(fx) + abs(fy))

    return (
        _run("bl_log_concavity", lieb_margin, samples, seed, tol, workers),
        _run("f_concavity", f_margin, samples, seed, tol, workers),
    )


def check_capacity_convexity(k, sampler, samples, tol=1e-9, workers=1):
    """Midpoint convexity of ``h(X) = log det T(X)`` on ``S^{nc}``."""

    def margin(rng):
        X, Y = sampler.draw(rng), sampler.draw(rng)
        hx, hy = log_det(k.apply(X)), log_det(k.apply(Y))
        hg = log_det(k.apply(geometric_mean(X, Y)))
        return (0.5 * (hx + hy) - hg) / (1.0 + abs(hx) + abs(hy))

    return _run("capacity_convexity", margin, samples, sampler.seed, tol, workers)


def gradient_fd_error(d, X, Q, gradient=f_euclidean_gradient):
    """Relative gap between ``Tr(G Q)`` and a central difference of ``F``.

    The central difference at ``h = 1e-3 ||X||_F / ||Q||_F`` is combined with
    the one at ``h / 2`` (Richardson), which cancels the ``h^2`` term; a plain
    central difference has no step that keeps both truncation and round-off
    well below ``1e-6``.

    The denominator is ``max(|Tr(G Q)|, 1e-3 ||X^{-1}||_F ||Q||_F)``; the
    second term is the size of a single log-det derivative and keeps the
    ratio meaningful when ``Tr(G Q)`` happens to be near zero.
    """

    def central(h):
        return (f_objective(d, X + h * Q) - f_objective(d, X - h * Q)) / (2 * h)

    h = 1e-3 * np.linalg.norm(X) / np.linalg.norm(Q)
    fd = (4.0 * central(h / 2) - central(h)) / 3.0
    an = float(np.sum(gradient(d, X) * Q))
    scale = np.linalg.norm(spd_inv(X)) * np.linalg.norm(Q)
    return abs(fd - an) / max(abs(an), 1e-3 * scale)


def check_gradient(d, samples, seed=0, tol=1e-6, gradient=f_euclidean_gradient,
                   condition_cap=10.0, workers=1):
    """Analytic gradient against central differences on random ``(X, Q)``;
    with ``d=None`` every sample also draws a fresh random datum.

    Points are drawn with a small condition number: the step is fixed
    relative to ``||X||_F``, so the truncation error grows with ``cond(X)``.
    """

    def margin(rng):
        datum = d if d is not None else random_simple_datum(rng)
        X = SpdSampler(datum.n, condition_cap).draw(rng)
        Q = symmetrize(rng.standard_normal((datum.n, datum.n)))
        return -gradient_fd_error(datum, X, Q, gradient)

    return _run("gradient_fd", margin, samples, seed, tol, workers)


def run_suite(d=None, samples=1000, seed=42, profile="default", workers=1, dim_cap=None):
    """All property checks; datum-bound ones only when ``d`` is given."""
    from .opscale import DEFAULT_DIM_CAP, build_scaling_operator

    cap = PROFILES[profile]["condition_cap"]
    tol = PROFILES[profile]["tolerance"]
    rng = np.random.default_rng([seed, 2**31])
    B = rng.standard_normal((2, 3))
    s3 = SpdSampler(3, cap, seed)
    reports = [
        check_ando(s3, B, samples, tol, workers),
        check_logdet_linearity(s3, samples, tol, workers),
        *check_maximal_characterization(s3, B, samples, tol),
    ]
    if d is not None:
        samplers = [SpdSampler(nj, cap, seed) for nj in d.dims]
        reports.append(check_joint_gm(samplers, datum_joint_maps(d), samples, tol, workers))
        reports.extend(check_bl_concavity(d, samples, seed, cap, tol, workers))
        k = build_scaling_operator(d, dim_cap or DEFAULT_DIM_CAP)
        reports.append(
            check_capacity_convexity(k, SpdSampler(k.input_dim, cap, seed), samples, tol, workers)
        )
    reports.append(check_gradient(d, samples, seed, workers=workers))
    return reports
