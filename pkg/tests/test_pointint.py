"""Point-interaction dynamics: bound state, reconstruction, resolvent, survival."""

import math

import numpy as np
import pytest

from tdpi.core import BetaProfile, RadialWavefunction, hankel_inverse, inner_product
from tdpi.freeprop import evolve_free
from tdpi.pointint import (
    ChargeTooSmall,
    NoBoundState,
    ResolventPole,
    bound_state,
    bound_state_forcing,
    boundary_coefficient,
    boundary_condition_residual,
    default_test_state,
    evolve_point_interaction,
    reconstruct_decomposed,
    resolvent_apply,
    survival_probability,
)


def test_boundary_coefficient_is_quarter_beta():
    assert boundary_coefficient(-0.5) == -0.125
    assert boundary_coefficient(2.0) == 0.5


def test_default_test_state_shape_and_norm():
    psi = default_test_state()
    r = psi.grid.nodes
    assert psi.samples[0] == 0.0
    assert np.isclose(psi.l2_norm, 1.0, rtol=1e-12)
    # profile proportional to r^3 e^{-r^2/2}
    ref = r**3 * np.exp(-0.5 * r * r)
    ratio = psi.samples[1:50].real / ref[1:50]
    assert np.allclose(ratio, ratio[0], rtol=1e-12)


def test_bound_state_energy_norm_and_positivity_domain():
    b = bound_state(-0.5)
    assert np.isclose(b.energy, -math.pi**2 / 4.0, rtol=1e-14)
    assert np.isclose(b.wavefunction.l2_norm, 1.0, rtol=1e-12)
    with pytest.raises(NoBoundState):
        bound_state(0.0)
    with pytest.raises(NoBoundState):
        bound_state(1.0)


def test_bound_state_forcing_starts_at_charge_value():
    beta0 = -0.5
    f = bound_state_forcing(beta0, 1e-3, 200)
    cb = math.sqrt(-beta0 / 2.0)
    assert np.isclose(f[0], 4.0 * math.pi * cb, rtol=1e-12)
    with pytest.raises(NoBoundState):
        bound_state_forcing(0.25, 1e-3, 100)


def test_strong_repulsion_approaches_free_evolution():
    # the interaction term of the resolvent vanishes like 1/beta, so the
    # dynamics converge to the free ones as beta -> +infinity
    psi0 = default_test_state()
    free = hankel_inverse(evolve_free(psi0, 1.0), psi0.grid)
    diffs = []
    for beta in (1.0, 10.0, 100.0):
        psi_t, _ = evolve_point_interaction(
            psi0, BetaProfile.constant(beta), 0.0, 1.0, 1e-3
        )
        diffs.append(
            psi_t.with_samples(psi_t.samples - free.samples).l2_norm
        )
    assert np.allclose(diffs, [0.347015, 0.041845, 0.004208], atol=2e-4)
    assert diffs[0] > 8.0 * diffs[1] > 8.0 * diffs[2]


def test_boundary_condition_residual_small_for_cosine_profile():
    prof = BetaProfile.cosine(gamma_a=-1.0, gamma_b=0.5, kappa=2.0)
    state = reconstruct_decomposed(default_test_state(), prof, 0.0, 0.5, 1e-3)
    res = boundary_condition_residual(state, float(prof(0.5)))
    assert res <= 0.01  # measured 7.3e-4


def test_boundary_condition_residual_needs_nonzero_charge():
    prof = BetaProfile.cosine(gamma_a=-1.0, gamma_b=0.5, kappa=2.0)
    state = reconstruct_decomposed(default_test_state(), prof, 0.0, 0.5, 1e-3)
    zeroed = type(state)(
        regular_part=state.regular_part, charge=0.0j, time=state.time
    )
    with pytest.raises(ChargeTooSmall):
        boundary_condition_residual(zeroed, -0.5)


def test_evolution_preserves_norm_to_tolerance():
    psi0 = default_test_state()
    prof = BetaProfile.cosine(gamma_a=-1.0, gamma_b=0.5, kappa=2.0)
    psi_t, _ = evolve_point_interaction(psi0, prof, 0.0, 1.0, 1e-3)
    assert abs(psi_t.l2_norm - 1.0) <= 1e-3


def test_resolvent_reproduces_bound_state_eigenrelation():
    # (H + lam)^{-1} psi_b = psi_b / (lam + E) with E = -pi^2 beta^2
    b = bound_state(-0.5)
    lam = 1.0
    out = resolvent_apply(-0.5, lam, b.wavefunction)
    factor = 1.0 / (lam + b.energy)
    err = out.with_samples(out.samples - factor * b.wavefunction.samples).l2_norm
    assert err / abs(factor) <= 1e-3  # measured 1.6e-4 (quadrature-limited)


def test_resolvent_adjoint_identity():
    # R(lam)^* = R(conj lam): requires the bilinear G-pairing, not a sesquilinear one
    psi = default_test_state()
    r = psi.grid.nodes
    phi = RadialWavefunction(
        psi.grid, (np.exp(-0.8 * (r - 1.0) ** 2) * r**2).astype(complex)
    )
    lam = 1.0 + 0.7j
    lhs = inner_product(
        psi.grid, phi.samples, resolvent_apply(-0.5, lam, psi).samples
    )
    rhs = inner_product(
        psi.grid, resolvent_apply(-0.5, np.conj(lam), phi).samples, psi.samples
    )
    assert abs(lhs - rhs) <= 1e-7 * abs(lhs)


def test_resolvent_pole_is_detected():
    with pytest.raises(ResolventPole):
        resolvent_apply(-0.5, math.pi**2 * 0.25, default_test_state())


def test_survival_starts_at_one_and_control_stays_near_one():
    t_grid = np.array([0.0, 1.0, 2.0])
    P = survival_probability(BetaProfile.constant(-1.0), t_grid, h=1e-3)
    assert P[0] == 1.0
    assert np.max(np.abs(P - 1.0)) <= 2e-2  # measured 3.0e-3


def test_survival_requires_initial_binding():
    with pytest.raises(NoBoundState):
        survival_probability(BetaProfile.constant(0.5), np.array([0.0, 1.0]), h=1e-3)


def test_driven_profile_ionizes_monotonically_at_early_times():
    prof = BetaProfile.cosine(gamma_a=-1.0, gamma_b=0.5, kappa=2.0)
    P = survival_probability(prof, np.array([0.0, 0.5, 1.0]), h=1e-3)
    assert P[0] == 1.0
    assert P[0] > P[1] > P[2]
    assert np.allclose(P[1:], [0.965237, 0.853371], atol=2e-4)
