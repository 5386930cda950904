import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from perdec.decomp import OperatorFamily, decompose_oracle
from perdec.ergodic import jdlg_split
from perdec.exceptions import (HypothesisViolationError, InvalidInputError, NotPeriodicError,
                               PreconditionError)
from perdec.onepar import (PeriodSpec, SemigroupSpec, aap_orbit_diagnostic, collapse_powers,
                           growth_bound, hausdorff, net_size, norm_continuity_defect,
                           peripheral_smt_check, periodic_spectrum_check, rational_lcm,
                           reduce_periods, semigroup_decompose)

from helpers import (periodic_generator, product_kernel_vector, random_generator,
                     random_unitary)

PI = math.pi
ROT = np.array([[0.0, 1.0], [-1.0, 0.0]])


# --- periods -------------------------------------------------------------------

def test_period_numeric_value():
    t = PeriodSpec.make(3, 4, "sqrt2")
    assert t.numeric == pytest.approx(0.75 * math.sqrt(2), rel=1e-14)
    assert t.commensurable(PeriodSpec.make(1, 7, "sqrt2"))
    assert not t.commensurable(PeriodSpec.make(3, 4))


@pytest.mark.parametrize("p,q", [(0, 1), (-1, 2), (1, 0), (1.5, 1)])
def test_period_rejects_bad_coefficients(p, q):
    with pytest.raises(InvalidInputError):
        PeriodSpec.make(p, q)


def test_period_rejects_unknown_tag():
    with pytest.raises(InvalidInputError):
        PeriodSpec.make(1, 1, "phi")


def test_reduce_examples():
    plan = reduce_periods([PeriodSpec.make(2, 3), PeriodSpec.make(1, 2)])
    assert plan.common_periods[0].rational == 2 and plan.multipliers == [3, 4]
    plan = reduce_periods([PeriodSpec.make(1), PeriodSpec.make(1, tag="sqrt2")])
    assert plan.classes == [[0], [1]] and plan.multipliers == [1, 1]
    plan = reduce_periods([PeriodSpec.make(k) for k in (1, 2, 3)])
    assert plan.common_periods[0].rational == 6 and plan.multipliers == [6, 3, 2]


def test_reduced_times_pairwise_incommensurable():
    times = [PeriodSpec.make(1, 2, "pi"), PeriodSpec.make(1), PeriodSpec.make(1, 3, "pi")]
    plan = reduce_periods(times)
    tags = [t.tag for t in plan.reduced_times]
    assert len(tags) == len(set(tags)) == 2
    assert plan.classes == [[0, 2], [1]]


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.integers(1, 50), st.integers(1, 50)), min_size=1, max_size=5))
def test_multipliers_are_exact(pairs):
    times = [PeriodSpec.make(p, q) for p, q in pairs]
    plan = reduce_periods(times)
    s = plan.common_periods[0].rational
    for m, t in zip(plan.multipliers, times):
        assert isinstance(m, int) and m * t.rational == s
    # minimality: no proper divisor s/k is a common multiple
    assert rational_lcm([t.rational for t in times]) == s
    for k in range(2, 8):
        assert not all((s / k / t.rational).denominator == 1 for t in times)


def test_rational_lcm_oracle():
    assert rational_lcm([Fraction(2, 3), Fraction(1, 2)]) == 2
    assert rational_lcm([Fraction(3, 4), Fraction(5, 6)]) == Fraction(15, 2)


# --- generators ---------------------------------------------------------------------

def test_growth_bound_examples():
    assert growth_bound(ROT) == pytest.approx(0, abs=1e-15)
    assert growth_bound(-np.eye(3)) == pytest.approx(-1)
    A = np.diag([0.3, -2.0])
    assert growth_bound(A) == pytest.approx(0.3)
    r = max(abs(np.linalg.eigvals(SemigroupSpec(A).T(2.0))))
    assert math.log(r) / 2 == pytest.approx(0.3, abs=1e-12)


def test_bounded_flag():
    assert SemigroupSpec(ROT).bounded_flag
    assert SemigroupSpec(np.diag([0.0, -1.0])).bounded_flag
    assert not SemigroupSpec(np.array([[0.0, 1.0], [0.0, 0.0]])).bounded_flag
    assert not SemigroupSpec(np.diag([0.1])).bounded_flag


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), t=st.sampled_from([0.5, 1.0, 2.0]))
def test_growth_bound_identity(seed, t):
    rng = np.random.default_rng(seed)
    A = random_generator(rng, int(rng.integers(1, 7)))
    S = SemigroupSpec(A)
    assert abs(S.growth_bound - growth_bound(A)) <= 1e-10 * max(np.linalg.norm(A, 2), 1)
    r = max(abs(np.linalg.eigvals(S.T(t))))
    assert abs(growth_bound(A) - math.log(r) / t) <= 1e-8


# --- decomposition -----------------------------------------------------------------

def test_incommensurable_instance():
    S = SemigroupSpec(np.diag([2j * PI, math.sqrt(2) * PI * 1j]))
    times = [S.period(1), S.period(1, tag="sqrt2")]
    res = semigroup_decompose(S, times, np.array([1.0, 1.0]), tol=1e-10)
    assert np.allclose(res.components[0], [1, 0], atol=1e-10)
    assert np.allclose(res.components[1], [0, 1], atol=1e-10)
    assert res.sum_residual <= 1e-10


def test_commensurable_instance_collapses_to_one_factor(rng):
    S = SemigroupSpec(np.diag([2j * PI, PI * 1j]))
    times = [S.period(1), S.period(2)]
    plan = reduce_periods(times)
    fam = collapse_powers(S, plan)
    assert fam.n == 1 and np.allclose(fam.ops[0], np.eye(2), atol=1e-13)
    x = rng.normal(size=2) + 0j
    res = semigroup_decompose(S, times, x)
    assert np.allclose(res.components[0], x, atol=1e-12)
    assert res.details["provenance"][0]["multipliers"] == [2, 1]


def test_two_thirds_and_half_give_single_factor_t2():
    S = SemigroupSpec(np.diag([3j * PI, 4j * PI]))
    fam = collapse_powers(S, reduce_periods([S.period(2, 3), S.period(1, 2)]))
    assert fam.n == 1 and np.allclose(fam.ops[0], S.T(2.0))


def test_negative_growth_bound_only_decomposes_zero():
    S = SemigroupSpec(-np.eye(2))
    with pytest.raises(PreconditionError):
        semigroup_decompose(S, [S.period(1), S.period(1, tag="pi")], np.array([1.0, 0.0]))
    res = semigroup_decompose(S, [S.period(1), S.period(1, tag="pi")], np.zeros(2))
    assert all(not np.any(c) for c in res.components)


def test_unbounded_semigroup_is_rejected():
    S = SemigroupSpec(np.array([[0.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(HypothesisViolationError):
        semigroup_decompose(S, [S.period(1)], np.array([1.0, 0.0]))


def test_pipeline_matches_unreduced_oracle(rng):
    seen = set()
    for trial in range(20):
        k = rng.integers(-3, 4, size=4)
        Q = random_unitary(4, rng)
        S = SemigroupSpec(Q @ np.diag(2j * PI * k / 6.0) @ Q.conj().T)
        times = [S.period(2), S.period(3), S.period(1, tag="sqrt2")]
        unreduced = OperatorFamily([S.T(t.numeric) for t in times])
        x = rng.normal(size=4) + 1j * rng.normal(size=4)
        if trial % 2:
            x = product_kernel_vector(unreduced.ops, rng)
        tol = 1e-8
        orc = decompose_oracle(unreduced, x)
        try:
            res = semigroup_decompose(S, times, x, tol=tol)
            accepted = res.accepted
        except PreconditionError:
            accepted = False
        assert accepted == (orc.sum_residual <= tol * np.linalg.norm(x))
        seen.add(accepted)
    assert seen == {True, False}


# --- spectral checks ---------------------------------------------------------------

def test_periodic_spectrum_examples():
    assert periodic_spectrum_check(np.diag([2j * PI, -4j * PI]), 1.0).passed
    with pytest.raises(NotPeriodicError):
        periodic_spectrum_check(np.diag([1j * PI]), 1.0)
    A = np.diag([2j * PI / 3 * k for k in range(3)])
    assert periodic_spectrum_check(A, 3.0).passed


def test_periodic_spectrum_random(rng):
    for _ in range(30):
        alpha = rng.uniform(0.5, 2.0)
        A, k = periodic_generator(rng, int(rng.integers(1, 7)), alpha)
        rep = periodic_spectrum_check(A, alpha)
        assert rep.passed and rep.period_defect <= 1e-8


def test_smt_examples():
    rep = peripheral_smt_check(np.diag([0.0, -1.0]), 1.0)
    assert np.allclose(rep.semigroup_side, [1]) and rep.passed
    rep = peripheral_smt_check(ROT, PI / 2)
    assert sorted(rep.semigroup_side.imag) == pytest.approx([-1, 1], abs=1e-14)
    assert rep.radius == pytest.approx(1) and rep.passed
    rep = peripheral_smt_check(np.diag([2j * PI, -1.0]), 1.0)
    assert np.allclose(rep.generator_side, [1]) and rep.passed


def test_hausdorff():
    assert hausdorff([], []) == 0
    assert hausdorff([0], []) == math.inf
    assert hausdorff([0, 1], [0]) == 1


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), t=st.floats(0.1, 3.0))
def test_smt_random(seed, t):
    A = random_generator(np.random.default_rng(seed), 5)
    assert peripheral_smt_check(A, t).distance <= 1e-8


def test_bounded_group_has_no_stable_part(rng):
    H = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    A = (H - H.conj().T) / 2  # skew-hermitian: both A and -A generate bounded semigroups
    assert SemigroupSpec(A).bounded_flag and SemigroupSpec(-A).bounded_flag
    assert jdlg_split(SemigroupSpec(A).T(1.0)).stable.dim == 0


# --- norm continuity -----------------------------------------------------------------

def test_zero_generator_is_norm_continuous():
    assert np.all(norm_continuity_defect(SemigroupSpec(np.zeros((2, 2)))).D == 0)


def test_norm_continuity_bound():
    A = np.diag([-1.0, 2j * PI])
    curve = norm_continuity_defect(SemigroupSpec(A), [10.0], [1e-3])
    a = np.linalg.norm(A, 2)
    assert curve.D[0] <= a * 1e-3 * math.exp(a * 1e-3)
    assert curve.D[0] <= 6.3e-3


def test_norm_continuity_rejects_unordered_grid():
    with pytest.raises(InvalidInputError):
        norm_continuity_defect(SemigroupSpec(np.zeros((1, 1))), [1.0], [1e-3, 1e-2])


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_tail_sup_nonincreasing(seed):
    A = random_generator(np.random.default_rng(seed), 4)
    A = A - (growth_bound(A) + 0.1) * np.eye(4)
    curve = norm_continuity_defect(SemigroupSpec(A))
    prev = None
    for h0 in curve.h_grid:
        cur = curve.tail_sup(h0)
        if prev is not None:
            assert np.all(cur <= prev + 1e-12)
        prev = cur
    # every matrix semigroup is uniformly norm continuous:
    # D(t) <= ||e^{-wt} T(t)|| * a h e^{a h} with a = ||A - w I||
    S = SemigroupSpec(A)
    w = curve.growth_bound
    a = np.linalg.norm(A - w * np.eye(4), 2)
    h = curve.h_grid[-1]
    for t, d in zip(curve.t_grid, curve.table[:, -1]):
        M = np.linalg.norm(np.exp(-w * t) * S.T(t), 2)
        assert d <= M * a * h * math.exp(a * h) * (1 + 1e-12)


# --- almost periodic orbits ------------------------------------------------------------

def test_net_size_of_circle():
    theta = np.linspace(0, 2 * PI, 20001)
    pts = np.stack([np.cos(theta), np.sin(theta)], axis=1)
    assert abs(net_size(pts, 0.1) - math.ceil(PI / 0.1)) <= 2
    assert net_size(np.zeros((5, 2)), 0.1) == 1
    assert net_size(np.zeros((0, 2)), 0.1) == 0


def test_aap_circle():
    rep = aap_orbit_diagnostic(SemigroupSpec(np.diag([2j * PI])), np.array([1.0]), 1.0, 4.0, 0.1)
    assert rep.bounded and rep.discrete_net == 1
    assert abs(rep.continuous_net - math.ceil(PI / 0.1)) <= 2
    assert rep.ratio == rep.continuous_net and rep.contract_holds


def test_aap_unbounded_orbit():
    rep = aap_orbit_diagnostic(SemigroupSpec(np.diag([1.0])), np.array([1.0]), 1.0, 30.0, 0.1)
    assert not rep.bounded and math.isnan(rep.ratio)


def test_aap_nets_stable_under_horizon_doubling(rng):
    H = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    A = PI * (H - H.conj().T) / np.linalg.norm(H, 2)
    S = SemigroupSpec(A)
    x = rng.normal(size=3) + 0j
    a = aap_orbit_diagnostic(S, x, 1.0, 16.0, 0.5)
    b = aap_orbit_diagnostic(S, x, 1.0, 32.0, 0.5)
    assert a.bounded and b.bounded
    assert a.max_norm_ratio == pytest.approx(1.0, abs=1e-10)
    assert b.continuous_net <= 3 * a.continuous_net
