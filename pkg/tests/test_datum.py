import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blgeo.datum import (
    BLDatum,
    Verdict,
    datum_from_json,
    f_euclidean_gradient,
    f_objective,
    feasibility_screen,
    load_datum,
    log_bl_objective,
    numerical_rank,
    validate_datum,
)
from blgeo.errors import (
    DimensionMismatch,
    NegativeExponent,
    RankDeficient,
    ScalingViolation,
    SingularAggregate,
)
from blgeo.spd import geometric_mean
from conftest import random_spd, simple_data
from oracles import central_difference

X21 = np.array([[2.0, 1.0], [1.0, 2.0]])


def test_valid_reference_data(hoelder, lw, young):
    for d in (hoelder, lw, young):
        assert validate_datum(d) is d
    assert hoelder.denominator == 2 and hoelder.numerators == (1, 1)
    assert young.denominator == 3 and young.scaling_sum() == 2


def test_scaling_violation():
    d = BLDatum(2, ([[1, 0]], [[0, 1]]), (Fraction(1, 2), Fraction(1, 2)))
    with pytest.raises(ScalingViolation) as info:
        validate_datum(d)
    assert info.value.total == 1 and info.value.n == 2


def test_rank_and_sign_rejections():
    with pytest.raises(RankDeficient) as info:
        validate_datum(BLDatum(2, ([[1, 1], [2, 2]],), (1,)))
    assert info.value.index == 0 and info.value.rank == 1
    with pytest.raises(NegativeExponent):
        validate_datum(BLDatum(1, ([[1.0]], [[1.0]]), (2, -1)))


def test_construction_rejections():
    with pytest.raises(TypeError, match="Floats are rejected"):
        BLDatum(2, ([[1, 0]],), (0.5,))
    with pytest.raises(DimensionMismatch):
        BLDatum(2, ([[1, 0, 0]],), (1,))
    with pytest.raises(DimensionMismatch):
        BLDatum(2, ([[1, 0]], [[0, 1]]), (1,))


def test_numerical_rank():
    assert numerical_rank(np.zeros((2, 2))) == 0
    assert numerical_rank([[1.0, 0.0], [0.0, 1e-12]]) == 1
    assert numerical_rank(np.eye(3)) == 3


def test_json_round_trip(young, data_dir):
    d = datum_from_json(json.loads(json.dumps(young.to_json())))
    assert d.p == young.p
    for a, b in zip(d.maps, young.maps):
        np.testing.assert_array_equal(a, b)
    y = load_datum(data_dir / "young.json")
    assert y.p == young.p and y.n == 2


@pytest.mark.parametrize(
    "obj",
    [
        {"n": 2, "maps": [[[1, 0]]], "p": [0.5]},
        {"n": 2, "maps": [[[1, 0]]], "p": [{"num": 0.5, "den": 1}]},
        {"n": 2, "maps": [[[1, 0]]], "p": [{"num": 1, "den": 0}]},
        {"n": 2, "maps": [[[1, 0]]]},
        {"n": "2", "maps": [[[1, 0]]], "p": [{"num": 1, "den": 1}]},
        [],
    ],
)
def test_json_rejections(obj):
    with pytest.raises(ValueError):
        datum_from_json(obj)


def test_lieb_objective_examples(hoelder, lw):
    assert log_bl_objective(hoelder, [np.eye(2), np.eye(2)]) == pytest.approx(0.0, abs=1e-15)
    val = log_bl_objective(hoelder, [np.eye(2), 4 * np.eye(2)])
    assert val == pytest.approx(np.log(0.8), abs=1e-14)
    for a1, a2 in [(1.0, 1.0), (1e-3, 7.0), (250.0, 0.02)]:
        assert log_bl_objective(lw, [[[a1]], [[a2]]]) == pytest.approx(0.0, abs=1e-13)


def test_lieb_objective_singular_aggregate(collapse):
    with pytest.raises(SingularAggregate):
        log_bl_objective(collapse, [[[1.0]], [[1.0]]])


def test_f_examples(hoelder, lw):
    for x1, x2 in [(1.0, 1.0), (3.0, 0.1), (1e3, 2e-2)]:
        assert f_objective(lw, np.diag([x1, x2])) == pytest.approx(0.0, abs=1e-13)
    assert f_objective(lw, X21) == pytest.approx(np.log(0.75), abs=1e-15)
    rng = np.random.default_rng(3)
    assert f_objective(hoelder, random_spd(rng, 2)) == pytest.approx(0.0, abs=1e-13)


def test_gradient_examples(hoelder, lw):
    np.testing.assert_allclose(f_euclidean_gradient(lw, np.eye(2)), 0.0, atol=1e-15)
    np.testing.assert_allclose(
        f_euclidean_gradient(lw, X21), [[1 / 6, -1 / 3], [-1 / 3, 1 / 6]], atol=1e-15
    )
    rng = np.random.default_rng(4)
    np.testing.assert_allclose(f_euclidean_gradient(hoelder, random_spd(rng, 2)), 0.0, atol=1e-12)


@pytest.mark.parametrize("d", simple_data(12), ids=lambda d: f"n{d.n}m{d.m}")
def test_gradient_matches_central_difference(d):
    rng = np.random.default_rng(d.m)
    X = random_spd(rng, d.n, cond=10.0)
    Q = rng.standard_normal((d.n, d.n))
    Q = Q + Q.T
    fd = central_difference(lambda Y: f_objective(d, Y), X, Q, 1e-5)
    an = float(np.sum(f_euclidean_gradient(d, X) * Q))
    assert an == pytest.approx(fd, rel=1e-6, abs=1e-8)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(1e-3, 1e3))
def test_f_scale_invariant_and_concave(seed, lam):
    rng = np.random.default_rng(seed)
    d = simple_data(1, seed)[0]
    X, Y = random_spd(rng, d.n), random_spd(rng, d.n)
    fx, fy = f_objective(d, X), f_objective(d, Y)
    assert f_objective(d, lam * X) == pytest.approx(fx, abs=1e-9)
    assert f_objective(d, geometric_mean(X, Y)) >= 0.5 * (fx + fy) - 1e-9 * (1 + abs(fx) + abs(fy))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_f_bounded_by_lieb_value(seed):
    """F(X) never exceeds twice the Lieb objective of the tuple (B_j X B_j^T)^{-1}."""
    rng = np.random.default_rng(seed)
    d = simple_data(1, seed)[0]
    X = random_spd(rng, d.n)
    A = [np.linalg.inv(B @ X @ B.T) for B in d.maps]
    assert f_objective(d, X) <= 2 * log_bl_objective(d, A) + 1e-9


def test_screen_examples(hoelder, lw, collapse):
    assert feasibility_screen(lw).verdict is Verdict.CONSISTENT_WITH_FEASIBLE
    assert feasibility_screen(hoelder).ok
    rep = feasibility_screen(collapse)
    assert rep.verdict is Verdict.INFEASIBLE_WITNESS
    np.testing.assert_allclose(np.abs(rep.witness), [[0.0], [1.0]], atol=1e-12)
    assert rep.detail["image_dims"] == [0, 0]


def test_screen_verdicts_for_bad_input():
    bad = BLDatum(2, ([[1, 0]], [[0, 1]]), (Fraction(1, 2), Fraction(1, 2)))
    assert feasibility_screen(bad).verdict is Verdict.SCALING_VIOLATION
    deficient = BLDatum(2, ([[1, 1], [1, 1]],), (1,))
    assert feasibility_screen(deficient).verdict is Verdict.RANK_DEFICIENT


def test_screen_kernel_subspaces():
    # ker B_1 = span(e_3) is covered by the two rank-one maps
    d = BLDatum(
        3,
        ([[1, 0, 0], [0, 1, 0]], [[0, 0, 1]], [[0, 0, 1]]),
        (Fraction(1), Fraction(1, 2), Fraction(1, 2)),
    )
    assert feasibility_screen(d).ok
    d = BLDatum(3, ([[1, 0, 0], [0, 1, 0]], [[1, 1, 0]]), (Fraction(3, 2), Fraction(0)))
    rep = feasibility_screen(d)
    assert rep.verdict is Verdict.INFEASIBLE_WITNESS


@pytest.mark.parametrize("d", simple_data(8), ids=lambda d: f"n{d.n}m{d.m}")
def test_screen_passes_generic_data(d):
    rep = feasibility_screen(d, seed=1)
    assert rep.ok and rep.checked_subspaces > 0
    assert feasibility_screen(d, seed=1).to_json() == rep.to_json()
