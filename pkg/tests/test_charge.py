"""Charge equation: Abel weights, both schemes, oracles, step profiles.

The strongest check is a closed form: for a constant coefficient b and
constant forcing f = 1 the Laplace transform gives

    q(t) = e^{a^2 t} erfc(a sqrt(t)) = wofz(i a sqrt(t)),   a = 4 pi e^{i pi/4} b,

which is independent of every discretization in the package.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import wofz

from tdpi.core import BetaProfile, stepify
from tdpi.charge import (
    GridMismatch,
    InvalidWindow,
    abel_transform,
    build_forcing,
    charge_for_step_profile,
    oracle_constant_beta,
    solve_charge,
)
from tdpi.pointint import default_test_state

H = 1e-3
N = 1000
T_NODES = H * np.arange(N + 1)
ONES = np.ones(N + 1, dtype=complex)


def closed_form(b: float, t: np.ndarray) -> np.ndarray:
    a = 4.0 * math.pi * np.exp(1j * math.pi / 4.0) * b
    return wofz(1j * a * np.sqrt(t))


def test_abel_transform_exact_on_constants():
    # the row sums of the product weights equal 2 sqrt(t) exactly
    out = abel_transform(ONES, H)
    assert np.allclose(out, 2.0 * np.sqrt(T_NODES), atol=1e-12)


def test_abel_transform_is_h_three_halves_accurate_on_linears():
    # A[tau](t) = 4/3 t^{3/2}; the panel rule is O(h^{3/2}) here
    errs = []
    for h in (1e-3, 2.5e-4):
        n = int(round(1.0 / h))
        t = h * np.arange(n + 1)
        out = abel_transform(t.astype(complex), h)
        errs.append(np.max(np.abs(out - (4.0 / 3.0) * t**1.5)))
    assert errs[0] <= 5e-5  # measured 2.61e-5
    assert 6.0 <= errs[0] / errs[1] <= 10.0  # measured 7.97 ~ 4^{3/2}


def test_zero_coefficient_gives_charge_equal_forcing():
    f = np.sin(3.0 * T_NODES) + 0.5j * T_NODES
    q = solve_charge(BetaProfile.constant(0.0), f, H).values
    assert np.allclose(q, f, atol=1e-14)


def test_zero_forcing_gives_zero_charge():
    q = solve_charge(BetaProfile.constant(-0.125), np.zeros(N + 1, complex), H).values
    assert np.max(np.abs(q)) == 0.0


@pytest.mark.parametrize(
    "scheme,sup_bound", [("product", 2e-3), ("cq", 3e-4)]
)
def test_constant_forcing_matches_closed_form(scheme, sup_bound):
    q = solve_charge(BetaProfile.constant(-0.125), ONES, H, scheme=scheme).values
    err = np.max(np.abs(q - closed_form(-0.125, T_NODES)))
    assert err <= sup_bound  # measured 1.47e-3 (product), 2.10e-4 (cq)


@pytest.mark.parametrize("scheme", ["product", "cq"])
def test_schemes_converge_first_order_through_the_cusp(scheme):
    # f(0) = 1 puts a sqrt(t) cusp at t = 0, which caps both schemes at O(h)
    errs = []
    for h in (4e-3, 1e-3):
        n = int(round(1.0 / h))
        t = h * np.arange(n + 1)
        q = solve_charge(
            BetaProfile.constant(-0.125), np.ones(n + 1, complex), h, scheme=scheme
        ).values
        errs.append(np.max(np.abs(q - closed_form(-0.125, t))))
    assert 3.0 <= errs[0] / errs[1] <= 5.2  # measured ratio ~4.1


def test_richardson_oracle_is_much_closer_to_the_closed_form():
    q = oracle_constant_beta(-0.125, ONES, H).values
    err = np.max(np.abs(q - closed_form(-0.125, T_NODES)))
    assert err <= 2e-6  # measured 5.8e-7


def test_auto_dispatch_matches_stiffness_rule():
    mild = BetaProfile.constant(-0.125)
    q_auto = solve_charge(mild, ONES, H).values
    q_prod = solve_charge(mild, ONES, H, scheme="product").values
    assert np.array_equal(q_auto, q_prod)

    stiff = BetaProfile.constant(-3.0)
    q_auto = solve_charge(stiff, ONES, H).values
    q_cq = solve_charge(stiff, ONES, H, scheme="cq").values
    assert np.array_equal(q_auto, q_cq)


def test_step_profile_with_constant_levels_reproduces_constant_solution():
    prof = BetaProfile.constant(-0.125)
    q = solve_charge(prof, ONES, H).values
    qn = charge_for_step_profile(prof, 8, ONES, H).values
    assert np.allclose(qn, q, atol=1e-13)


def test_step_profile_refinement_approaches_the_cosine_solution():
    prof = BetaProfile.cosine(gamma_a=-0.25, gamma_b=0.125, kappa=2.0).scaled(1.0)
    q = solve_charge(prof, ONES, H).values
    d4 = np.max(np.abs(charge_for_step_profile(prof, 4, ONES, H).values - q))
    d8 = np.max(np.abs(charge_for_step_profile(prof, 8, ONES, H).values - q))
    assert d8 < d4


def test_step_profile_requires_divisible_window():
    with pytest.raises(GridMismatch):
        charge_for_step_profile(BetaProfile.constant(-0.125), 3, ONES, H)


def test_stepify_left_endpoint_equivalence():
    # charge_for_step_profile(beta, n, ...) is solve_charge on stepify(beta, n)
    prof = BetaProfile.cosine(gamma_a=-0.25, gamma_b=0.125, kappa=2.0)
    qn = charge_for_step_profile(prof, 4, ONES, H).values
    q_direct = solve_charge(stepify(prof, 4, 1.0), ONES, H).values
    assert np.array_equal(qn, q_direct)


def test_forcing_window_validation():
    psi = default_test_state()
    with pytest.raises(InvalidWindow):
        build_forcing(psi, 0.0, 0.05, 1e-3)  # only 50 steps
    with pytest.raises(InvalidWindow):
        build_forcing(psi, 0.0, 1.0, 3e-3)  # 3e-3 does not divide 1.0


def test_forcing_vanishes_at_start_for_origin_vanishing_state():
    f = build_forcing(default_test_state(), 0.0, 0.2, 1e-3)
    assert f.shape == (201,)
    assert abs(f[0]) == 0.0
    assert np.all(np.isfinite(f.view(float)))


@settings(max_examples=15, deadline=None)
@given(
    seed=st.integers(min_value=0, max_value=2**31 - 1),
    scale=st.floats(min_value=-2.0, max_value=2.0).filter(lambda x: abs(x) > 1e-2),
)
def test_solver_is_linear_in_the_forcing(seed, scale):
    rng = np.random.default_rng(seed)
    f1 = rng.standard_normal(129) + 1j * rng.standard_normal(129)
    f2 = rng.standard_normal(129) + 1j * rng.standard_normal(129)
    prof = BetaProfile.cosine(gamma_a=-0.25, gamma_b=0.125, kappa=2.0)
    h = 1e-2
    q1 = solve_charge(prof, f1, h).values
    q2 = solve_charge(prof, f2, h).values
    q12 = solve_charge(prof, scale * f1 + f2, h).values
    assert np.allclose(q12, scale * q1 + q2, atol=1e-10 * (1.0 + abs(scale)))
