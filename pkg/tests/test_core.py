"""Grids, wavefunctions, profiles and the radial Fourier (Hankel) pair."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tdpi.core import (
    BetaProfile,
    ChargeTrajectory,
    InvalidGrid,
    RadialGrid,
    RadialWavefunction,
    TruncationError,
    default_momentum_grid,
    hankel_forward,
    hankel_inverse,
    sqrt_pi_i,
    stepify,
    trapezoid_weights,
)

GRID = RadialGrid(r_max=18.0, n_points=721)


def gaussian(grid=GRID, width=1.0):
    r = grid.nodes
    return RadialWavefunction(grid, np.exp(-0.5 * (r / width) ** 2).astype(complex))


def test_grid_nodes_are_uniform_from_zero():
    g = RadialGrid(r_max=4.0, n_points=17)
    assert np.allclose(g.nodes, np.arange(17) * 0.25)
    assert g.spacing == 0.25


def test_degenerate_grids_rejected():
    with pytest.raises(InvalidGrid):
        RadialGrid(r_max=-1.0, n_points=32)
    with pytest.raises(InvalidGrid):
        RadialGrid(r_max=1.0, n_points=5)


def test_trapezoid_weights_integrate_constants():
    w = trapezoid_weights(GRID)
    assert np.isclose(np.sum(w), GRID.r_max, rtol=0, atol=1e-12)


def test_l2_norm_of_cubic_gaussian_matches_closed_form():
    # 4 pi int r^6 e^{-r^2} r^2 dr = 4 pi Gamma(9/2)/2 = 105 pi^{3/2} / 8
    r = GRID.nodes
    psi = RadialWavefunction(GRID, (r**3 * np.exp(-0.5 * r * r)).astype(complex))
    exact = math.sqrt(105.0 * math.pi**1.5 / 8.0)
    assert np.isclose(psi.l2_norm, exact, rtol=1e-10)


def test_sqrt_pi_i_is_principal_branch():
    assert np.isclose(sqrt_pi_i(), math.sqrt(math.pi) * np.exp(1j * math.pi / 4.0))


def test_hankel_gaussian_matches_analytic_transform():
    # unitary convention: the 3D transform of e^{-|x|^2/2} is e^{-|k|^2/2}
    psihat = hankel_forward(gaussian())
    k = psihat.grid.nodes
    assert psihat.representation == "momentum"
    assert np.allclose(psihat.samples, np.exp(-0.5 * k * k), atol=1e-9)


def test_hankel_roundtrip_recovers_position_samples():
    psi = gaussian()
    back = hankel_inverse(hankel_forward(psi), GRID)
    assert back.representation == "position"
    assert np.allclose(back.samples, psi.samples, atol=1e-8)


def test_hankel_norm_is_preserved():
    psi = gaussian(width=1.3)
    assert np.isclose(hankel_forward(psi).l2_norm, psi.l2_norm, rtol=1e-8)


def test_undecayed_position_tail_is_rejected():
    r = GRID.nodes
    slow = RadialWavefunction(GRID, (1.0 / (1.0 + r * r)).astype(complex))
    with pytest.raises(TruncationError):
        hankel_forward(slow)


def test_default_momentum_grid_covers_requested_cutoff():
    kgrid = default_momentum_grid(GRID, k_max=16.0)
    assert np.isclose(kgrid.nodes[-1], 16.0)
    # fine enough to resolve oscillations e^{ik r_max}
    assert kgrid.spacing <= 2.0 * math.pi / GRID.r_max / 19.9


def test_beta_profile_cosine_and_scaled():
    prof = BetaProfile.cosine(gamma_a=-1.0, gamma_b=0.5, kappa=2.0, s=0.25)
    t = np.array([0.25, 0.25 + math.pi / 2.0])
    assert np.allclose(prof(t), [-0.5, -1.5])
    assert np.allclose(prof.scaled(0.25)(t), [-0.125, -0.375])


def test_stepify_freezes_left_endpoints():
    prof = BetaProfile.cosine(gamma_a=-1.0, gamma_b=0.5, kappa=2.0, s=0.0)
    step = stepify(prof, n=4, t_end=1.0)
    # constant on each quarter, equal to the profile at the left endpoint
    for j in range(4):
        left = j * 0.25
        inside = left + 0.1
        assert np.isclose(float(step(inside)), float(prof(left)))
    assert step.kind == "step"


def test_charge_trajectory_times_and_endpoint():
    traj = ChargeTrajectory(
        t_start=0.5, step=0.25, values=np.array([1.0, 2.0, 3.0], dtype=complex)
    )
    assert np.allclose(traj.times, [0.5, 0.75, 1.0])
    assert traj.at_end() == 3.0 + 0.0j


@settings(max_examples=25, deadline=None)
@given(
    width=st.floats(min_value=0.5, max_value=2.0),
    scale=st.floats(min_value=-3.0, max_value=3.0).filter(lambda x: abs(x) > 1e-3),
)
def test_norm_is_absolutely_homogeneous(width, scale):
    psi = gaussian(width=width)
    assert np.isclose(
        psi.with_samples(scale * psi.samples).l2_norm,
        abs(scale) * psi.l2_norm,
        rtol=1e-12,
    )
