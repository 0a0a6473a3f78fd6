"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` (lines are printed even
without ``-s``).
"""

import time
from fractions import Fraction

import numpy as np
import pytest

from blgeo.datum import (
    BLDatum,
    Verdict,
    collapse_datum,
    f_objective,
    feasibility_screen,
    hoelder_datum,
    log_bl_objective,
    loomis_whitney_datum,
    young_triple_datum,
)
from blgeo.errors import Diverged
from blgeo.opscale import build_scaling_operator, capacity, log_bl_from_capacity
from blgeo.solvers import (
    SolverConfig,
    extract_maximizer,
    solve_fixed_point,
    solve_geodesic_ascent,
    stationarity_residual,
)
from blgeo.verify import (
    SpdSampler,
    check_capacity_convexity,
    check_gradient,
    check_joint_gm,
    datum_joint_maps,
    run_suite,
)
from conftest import random_spd, simple_data
from oracles import young_log_bl_grid


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {number}: {detail}")
        assert ok, detail

    return emit


def _three_methods(d):
    fp = solve_fixed_point(d).log_bl
    ga = solve_geodesic_ascent(d).log_bl
    cap = log_bl_from_capacity(capacity(build_scaling_operator(d)))
    return fp, ga, cap


def _integer_datum():
    maps = ([[1, 0, 0]], [[0, 1, 0]], [[0, 0, 1]], [[1, 1, 1]], [[1, -2, 3]])
    return BLDatum(3, maps, (Fraction(3, 5),) * 5)


def test_analytic_constants(report):
    errs = {}
    for name, d in (("hoelder", hoelder_datum()), ("loomis-whitney", loomis_whitney_datum())):
        fp, ga, cap = _three_methods(d)
        errs[name] = (abs(fp), abs(ga), abs(cap))
    ok = all(a <= 1e-8 and b <= 1e-8 and c <= 1e-4 for a, b, c in errs.values())
    detail = ", ".join(f"{k} |err| fp={a:.1e} geo={b:.1e} cap={c:.1e}" for k, (a, b, c) in errs.items())
    report(1, ok, detail)


def test_young_cross_check(report):
    d = young_triple_datum()
    fp, ga, cap = _three_methods(d)
    grid = young_log_bl_grid()
    ok = abs(fp - ga) <= 1e-7 and max(abs(fp - grid), abs(ga - grid)) <= 1e-6 and abs(cap - fp) <= 1e-4
    report(
        2, ok,
        f"fp={fp:.12f} geo={ga:.12f} grid={grid:.12f} cap={cap:.12f} "
        f"(|fp-geo|={abs(fp - ga):.1e}, |cap-fp|={abs(cap - fp):.1e})",
    )


def test_stationarity_consistency(report):
    data = [hoelder_datum(), loomis_whitney_datum(), young_triple_datum(), *simple_data(20)]
    worst_res = worst_gap = 0.0
    for d in data:
        for solver in (solve_fixed_point, solve_geodesic_ascent):
            X = solver(d).optimizer_x
            worst_res = max(worst_res, stationarity_residual(d, X))
            gap = abs(2 * log_bl_objective(d, extract_maximizer(d, X)) - f_objective(d, X))
            worst_gap = max(worst_gap, gap)
    ok = worst_res <= 1e-10 and worst_gap <= 1e-9
    report(3, ok, f"{2 * len(data)} solves, max residual {worst_res:.1e}, max |2 logBL(A) - F| {worst_gap:.1e}")


def test_property_suites(report):
    start = time.perf_counter()
    reports = run_suite(young_triple_datum(), samples=1000, seed=42)
    lw = loomis_whitney_datum()
    samplers = [SpdSampler(1, 1e4, 42), SpdSampler(1, 1e4, 42)]
    reports.append(check_joint_gm(samplers, datum_joint_maps(lw), 1000, 1e-9))
    k = build_scaling_operator(lw)
    reports.append(check_capacity_convexity(k, SpdSampler(k.input_dim, 1e4, 42), 1000, 1e-9))
    # the gradient suite has its own criterion and tolerance
    reports = [r for r in reports if r.property_name != "gradient_fd"]
    elapsed = time.perf_counter() - start
    bad = [r.property_name for r in reports if r.violations or r.tolerance != 1e-9 or r.samples != 1000]
    summary = ", ".join(f"{r.property_name}={r.violations}" for r in reports)
    report(4, not bad and elapsed <= 300, f"violations {summary}; {elapsed:.1f}s")


def test_gradient_check(report):
    rep = check_gradient(None, 200, seed=42, tol=1e-6)
    report(5, rep.violations == 0 and rep.samples == 200,
           f"200 triples, {rep.violations} violations, worst rel error {-rep.worst_margin:.1e}")


def test_scalar_ray_uniqueness(report):
    data = [young_triple_datum(), *simple_data(6, seed=3)]
    worst = 0.0
    for i, d in enumerate(data):
        rng = np.random.default_rng(i)
        opts = [solve_geodesic_ascent(d, x0=random_spd(rng, d.n, 1e3)).optimizer_x for _ in range(20)]
        ref = opts[0]
        worst = max(worst, max(np.linalg.norm(X - ref) for X in opts))
    report(6, worst <= 1e-6, f"{len(data)} data x 20 restarts, max Frobenius spread {worst:.1e}")


def test_infeasible_collapse(report):
    d = collapse_datum()
    rep = feasibility_screen(d)
    witnessed = rep.verdict is Verdict.INFEASIBLE_WITNESS and rep.witness is not None
    cfg = SolverConfig()
    try:
        solve_fixed_point(d, cfg)
        diverged, at = False, None
    except Diverged as exc:
        diverged, at = True, exc.result.iterations
    ok = witnessed and diverged and at <= cfg.max_iter
    report(7, ok, f"screen {rep.verdict.value} witness={None if rep.witness is None else rep.witness.ravel().tolist()}, "
                  f"fixed point Diverged={diverged} at iteration {at}")


def test_reduction_structure(report):
    exact = []
    for d in (hoelder_datum(), loomis_whitney_datum(), young_triple_datum(), collapse_datum(), _integer_datum()):
        k = build_scaling_operator(d)
        expected = sum(cj * B.T @ B for cj, B in zip(d.numerators, d.maps))
        exact.append(np.array_equal(k.apply(np.eye(k.input_dim)), expected))
    worst = 0.0
    for d in (hoelder_datum(), loomis_whitney_datum(), young_triple_datum(), _integer_datum(), *simple_data(8)):
        r = capacity(build_scaling_operator(d))
        worst = max(worst, r.ds_residual)
    report(8, all(exact) and worst <= 1e-8,
           f"T(I) exact on {sum(exact)}/{len(exact)} data, max ds_residual {worst:.1e}")
