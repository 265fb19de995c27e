import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from conftest import ldpc_23, mixed_rep
from dgldpc.asymptotics import (
    binary_entropy,
    check_side_expansion,
    check_side_growth,
    check_side_max_ratio,
    check_side_solution,
    coeff_growth_1d,
    coeff_growth_2d,
    exact_coeff_power_1d,
    exact_coeff_power_2d,
    finite_growth_1d,
    finite_growth_2d,
    growth_rate_general,
    minkowski_sum,
    small_xi_expansion_1d,
    solve_growth_general,
    vn_zero_correction,
    vn_zero_correction_bound,
)
from dgldpc.codes import repetition, single_parity_check
from dgldpc.ensemble import build_ensemble
from dgldpc.errors import CapacityError, InfeasibleRatioError
from dgldpc.spectral import growth_rate_slope
from test_ensemble import ensembles

B_SPC = {(0, 0): 1, (1, 2): 2, (2, 2): 1}


def spc_mixture():
    return build_ensemble(
        [(single_parity_check(3), F(1, 2)), (single_parity_check(6), F(1, 2))], [(repetition(2), F(1))]
    )


def rep23_over_spc4():
    return build_ensemble(
        [(single_parity_check(4), F(1))], [(repetition(2), F(1, 2)), (repetition(3), F(1, 2))]
    )


polys = st.lists(st.integers(0, 6), min_size=1, max_size=6).map(lambda t: [1] + t).filter(lambda a: any(a[1:]))


@st.composite
def bipolys(draw):
    n = draw(st.integers(1, 5))
    pts = draw(
        st.lists(st.tuples(st.integers(0, 3), st.integers(1, 4)), min_size=n, max_size=n, unique=True)
    )
    out = {(0, 0): 1}
    for p in pts:
        out[p] = draw(st.integers(1, 5))
    return out


# ---------------------------------------------------------------------------
# univariate coefficient growth


def test_binomial_growth():
    value, dist = coeff_growth_1d([1, 1], F(1, 2))
    assert value == pytest.approx(math.log(2), abs=1e-12)
    assert list(dist.weights) == pytest.approx([0.5, 0.5], abs=1e-15)


def test_zero_ratio_is_the_empty_word():
    value, dist = coeff_growth_1d([1, 0, 3, 1], 0)
    assert value == 0.0
    assert {i: w for i, w in zip(dist.support, dist.weights) if w} == {0: 1.0}


def test_top_ratio_is_the_top_vertex():
    value, dist = coeff_growth_1d([1, 0, 3, 2], 3)
    assert value == pytest.approx(math.log(2), abs=1e-14)
    assert dict(zip(dist.support, dist.weights))[3] == 1.0


def test_infeasible_ratio():
    for xi in (-0.1, 1.5):
        with pytest.raises(InfeasibleRatioError):
            coeff_growth_1d([1, 1], xi)


def test_spc3_growth_matches_long_power():
    # 1e-3 at l = 2000 is tighter than the O(log l / l) finite-length gap here (about 1.8e-3)
    value, _ = coeff_growth_1d([1, 0, 3], F(3, 10))
    assert abs(value - finite_growth_1d([1, 0, 3], F(3, 10), 2000)) <= 1e-3


def test_expansion_examples():
    assert small_xi_expansion_1d(3, 2, 0.01) == pytest.approx(0.005 * math.log(600 * math.e), rel=1e-14)
    assert small_xi_expansion_1d(3, 2, 0) == 0
    assert small_xi_expansion_1d(1, 1, 1) == pytest.approx(1.0, abs=1e-15)
    value, _ = coeff_growth_1d([1, 0, 3], 0.01)
    assert abs(value - small_xi_expansion_1d(3, 2, 0.01)) <= 0.2 * 0.01**2


def test_exact_coefficients():
    assert exact_coeff_power_1d([1, 1], 10, 4) == 210
    assert exact_coeff_power_1d([1, 0, 3], 3, 4) == 27
    assert exact_coeff_power_2d({(0, 0): 1, (1, 2): 1}, 5, 2, 4) == 10
    assert exact_coeff_power_1d([1, 1], 10, 11) == 0


def test_exact_coefficient_capacity():
    with pytest.raises(CapacityError):
        exact_coeff_power_1d([1, 1, 1], 60_000, 10)


@settings(max_examples=80, deadline=None)
@given(polys, st.floats(min_value=0.0, max_value=1.0))
def test_dual_equals_primal_1d(A, frac):
    xi = frac * max(i for i, a in enumerate(A) if a)
    value, dist = coeff_growth_1d(A, xi)
    assert dist.primal_value(dict(enumerate(A))) == pytest.approx(value, abs=1e-9)
    w = np.asarray(dist.weights)
    assert (w >= 0).all()
    assert abs(w.sum() - 1) <= 1e-10
    assert abs(float(np.dot(dist.support, w)) - xi) <= 1e-10 * max(1.0, xi)


@pytest.mark.parametrize(("A", "xi"), [([1, 1], F(1, 2)), ([1, 0, 3, 1], F(3, 10)), ([1, 0, 3, 1], F(1, 10))])
def test_finite_length_convergence(A, xi):
    value, _ = coeff_growth_1d(A, xi)
    ells = [250, 500, 1000, 2000]
    gaps = [abs(finite_growth_1d(A, xi, ell) - value) for ell in ells]
    assert all(a > b for a, b in zip(gaps, gaps[1:]))
    slope = np.polyfit(np.log(ells), np.log(gaps), 1)[0]
    assert -1.3 <= slope <= -0.7


@pytest.mark.parametrize(("A", "c"), [([1, 0, 3], 2), ([1, 1], 1), ([1, 0, 3, 0, 2], 2), ([1, 0, 0, 5, 0, 0, 1], 3)])
def test_small_ratio_expansion_error_is_quadratic(A, c):
    ratios = []
    for xi in (1e-2, 1e-3, 1e-4):
        value, _ = coeff_growth_1d(A, xi)
        ratios.append(abs(value - small_xi_expansion_1d(A[c], c, xi)) / xi**2)
    assert max(ratios) / min(ratios) < 10


# ---------------------------------------------------------------------------
# bivariate coefficient growth


def test_collinear_support_reduces_to_binomial():
    value, eta = coeff_growth_2d({(0, 0): 1, (1, 2): 1}, 0.3, 0.6)
    assert value == pytest.approx(binary_entropy(0.3), abs=1e-12)
    assert value == pytest.approx(0.610864, abs=1e-6)
    assert eta.as_dict()[(1, 2)] == pytest.approx(0.3, abs=1e-12)


def test_off_line_target_is_infeasible():
    with pytest.raises(InfeasibleRatioError):
        coeff_growth_2d({(0, 0): 1, (1, 2): 1}, 0.3, 0.5)
    with pytest.raises(InfeasibleRatioError):
        coeff_growth_2d(B_SPC, 0.5, 0.4)


def test_spc_io_growth_matches_long_power():
    # 1e-3 at l = 400 is tighter than the finite-length gap here (about 1.3e-2)
    value, _ = coeff_growth_2d(B_SPC, F(1, 4), F(2, 5))
    assert abs(value - finite_growth_2d(B_SPC, F(1, 4), F(2, 5), 400)) <= 1e-3


def test_boundary_target_uses_the_face():
    # theta = 2 xi lies on the hull edge from (0,0) to (1,2); (2,2) must carry no mass
    value, eta = coeff_growth_2d(B_SPC, F(1, 4), F(1, 2))
    assert value == pytest.approx(binary_entropy(0.25) + 0.25 * math.log(2), abs=1e-12)
    assert eta.as_dict().get((2, 2), 0.0) == 0.0


@settings(max_examples=80, deadline=None)
@given(bipolys(), st.floats(0.01, 0.99), st.floats(0.01, 0.99))
def test_dual_equals_primal_2d(B, a, b):
    from dgldpc.asymptotics import convex_hull

    hull = convex_hull(list(B))
    assume(len(hull) >= 3)
    # a point inside the hull: convex combination of the hull vertices
    w = np.array([a, b, 1.0] + [0.5] * (len(hull) - 3))
    w /= w.sum()
    xi = float(np.dot(w, [p[0] for p in hull]))
    theta = float(np.dot(w, [p[1] for p in hull]))
    value, eta = coeff_growth_2d(B, xi, theta)
    assert eta.primal_value(B) == pytest.approx(value, abs=1e-9)
    d = eta.as_dict()
    assert all(v >= 0 for v in d.values())
    assert abs(sum(d.values()) - 1) <= 1e-10
    assert abs(sum(i * v for (i, j), v in d.items()) - xi) <= 1e-10
    assert abs(sum(j * v for (i, j), v in d.items()) - theta) <= 1e-10


def test_minkowski_sum_of_segments():
    square = minkowski_sum([[(F(0), F(0)), (F(1), F(0))], [(F(0), F(0)), (F(0), F(1))]])
    assert sorted(square) == [(0, 0), (0, 1), (1, 0), (1, 1)]


# ---------------------------------------------------------------------------
# check-node side


def test_single_type_check_side_is_lemma_growth():
    ens = ldpc_23()
    assert check_side_growth(ens, 0.2) == pytest.approx(coeff_growth_1d([1, 0, 3], 0.2)[0], abs=1e-12)
    assert check_side_growth(ens, 0) == 0.0


def test_check_side_range():
    ens = spc_mixture()
    with pytest.raises(InfeasibleRatioError):
        check_side_growth(ens, float(check_side_max_ratio(ens)) * 1.01)


@pytest.mark.parametrize("make", [ldpc_23, spc_mixture])
def test_check_side_expansion(make):
    ens = make()
    ratios = []
    for d in (1e-2, 1e-3, 1e-4):
        diff = check_side_growth(ens, d) - check_side_expansion(ens, d)
        assert abs(diff) < d
        ratios.append(abs(diff) / d**2)
    assert max(ratios) / min(ratios) < 10


@settings(max_examples=60, deadline=None)
@given(ensembles(), st.floats(0.02, 0.98))
def test_check_side_routes_agree(ens, frac):
    delta = frac * float(check_side_max_ratio(ens))
    sol = check_side_solution(ens, delta)
    assert abs(sol.value - sol.value_by_types) <= 1e-9
    assert sum(sol.epsilon) == pytest.approx(delta, abs=1e-10)


# ---------------------------------------------------------------------------
# general growth rate


def test_general_growth_at_zero():
    assert growth_rate_general(ldpc_23(), 0) == 0.0


def test_general_growth_closed_form():
    # for lambda = x, rho = x^2 every codeword of weight a n uses 2 a n edges, giving a closed form
    expected = (2 / 3) * binary_entropy(0.25) + math.log(3) / 6 - binary_entropy(1 / 6)
    assert growth_rate_general(ldpc_23(), F(1, 6)) == pytest.approx(expected, abs=1e-12)


def test_general_growth_slope_limit():
    ens = ldpc_23()
    slope = growth_rate_slope(ens)
    rel = [abs(growth_rate_general(ens, a) - a * slope) / a for a in (1e-2, 1e-3, 1e-4)]
    assert rel[0] > rel[1] > rel[2]
    assert rel[2] < 1e-3


def test_general_growth_positive_at_peak():
    ens = ldpc_23()
    alphas = np.linspace(0.05, 0.65, 13)  # SPC-3 checks cap the weight at 2n/3
    values = [growth_rate_general(ens, a) for a in alphas]
    peak = int(np.argmax(values))
    assert values[peak] > 0
    assert 0 < peak < len(alphas) - 1


def test_general_growth_infeasible():
    with pytest.raises(InfeasibleRatioError):
        growth_rate_general(ldpc_23(), 1.0)
    with pytest.raises(InfeasibleRatioError):
        growth_rate_general(ldpc_23(), -0.1)


def test_beta_range_metadata():
    sol = solve_growth_general(mixed_rep(), 0.1)
    assert sol.beta_over_alpha_range == (2.0, 3.0)
    assert 2.0 * 0.1 <= sol.beta <= 3.0 * 0.1


@pytest.mark.parametrize("make", [ldpc_23, mixed_rep, rep23_over_spc4])
def test_general_growth_duality(make):
    for a in (1e-2, 1e-1):
        assert solve_growth_general(make(), a).dual_gap <= 1e-9


def test_weight_above_two_vanishes_for_ldpc():
    sol = solve_growth_general(ldpc_23(), 1e-4)
    assert sol.mass_j_above_2 == 0.0


def test_weight_above_two_mass_decreases():
    # the j > 2 mass of nu shrinks like sqrt(alpha) when a weight-3 VN type is present
    masses = [solve_growth_general(rep23_over_spc4(), a).mass_j_above_2 for a in (1e-2, 1e-3, 1e-4)]
    assert masses[0] > masses[1] > masses[2] > 0
    for hi, lo in zip(masses, masses[1:]):
        assert hi / lo == pytest.approx(math.sqrt(10), rel=0.1)


def test_weight_above_two_mass_threshold():
    sol = solve_growth_general(rep23_over_spc4(), 1e-4)
    assert sol.mass_j_above_2 < 1e-6


@pytest.mark.parametrize("make", [ldpc_23, mixed_rep, rep23_over_spc4])
def test_zero_codeword_correction_is_quadratic(make):
    ens = make()
    bound = vn_zero_correction_bound(ens)
    for a in (1e-2, 1e-3):
        sol = solve_growth_general(ens, a)
        corr = vn_zero_correction(ens, [p["eta"] for p in sol.per_type])
        assert abs(corr) / a**2 <= bound
