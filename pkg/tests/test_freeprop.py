"""Free propagator: closed-form Gaussian checks and origin-value quadrature."""

import math

import numpy as np
import pytest

from tdpi.core import RadialGrid, RadialWavefunction, TruncationError
from tdpi.freeprop import (
    SingularTime,
    evolve_free,
    kernel,
    to_momentum,
    value_at_origin,
    values_at_origin,
)

GRID = RadialGrid(r_max=18.0, n_points=721)


def gaussian():
    r = GRID.nodes
    return RadialWavefunction(GRID, np.exp(-0.5 * r * r).astype(complex))


def test_kernel_is_singular_at_zero_time():
    with pytest.raises(SingularTime):
        kernel(0.0, 1.0)


def test_kernel_closed_form_value():
    t, x = 0.7, 1.3
    expected = (4.0 * math.pi * 1j * t) ** (-1.5) * np.exp(1j * x * x / (4.0 * t))
    assert np.isclose(kernel(t, x), expected, rtol=1e-14)


def test_free_evolution_preserves_momentum_norm_exactly():
    psihat = to_momentum(gaussian())
    out = evolve_free(psihat, 0.37)
    assert np.allclose(np.abs(out.samples), np.abs(psihat.samples), atol=1e-15)


def test_free_evolution_of_gaussian_matches_closed_form():
    # psi0 = e^{-r^2/2}: evolved state is (1+2it)^{-3/2} e^{-r^2/(2(1+2it))}
    from tdpi.core import hankel_inverse

    t = 0.4
    out = hankel_inverse(evolve_free(gaussian(), t), GRID)
    z = 1.0 + 2.0j * t
    r = GRID.nodes
    expected = z**-1.5 * np.exp(-r * r / (2.0 * z))
    assert np.allclose(out.samples, expected, atol=2e-6)


def test_value_at_origin_of_gaussian_matches_closed_form():
    psi = gaussian()
    for t in (0.0, 0.1, 1.0):
        expected = (1.0 + 2.0j * t) ** -1.5
        assert np.isclose(value_at_origin(psi, t), expected, atol=2e-6)


def test_values_at_origin_equals_scalar_loop():
    psi = gaussian()
    dts = np.array([0.0, 0.05, 0.3, 0.9])
    batch = values_at_origin(psi, dts)
    single = np.array([value_at_origin(psi, dt) for dt in dts])
    assert np.allclose(batch, single, atol=1e-13)


def test_cubic_origin_state_has_algebraic_momentum_tail():
    # psi = N r^3 e^{-r^2/2} is C^2 but not C^3 as a 3D function, so its
    # transform decays like 24 N sqrt(2/pi) / k^6 instead of exponentially.
    from tdpi.pointint import default_test_state

    psi = default_test_state(GRID)
    n_const = float(np.max(np.abs(psi.samples) * np.exp(0.5 * GRID.nodes**2) /
                           np.where(GRID.nodes > 0, GRID.nodes, 1.0) ** 3))
    psihat = to_momentum(psi)
    k = psihat.grid.nodes
    sel = k >= 14.0
    predicted = 24.0 * n_const * math.sqrt(2.0 / math.pi) / k[sel] ** 6
    measured = np.abs(psihat.samples[sel])
    # leading term only; the next correction is O(k^-2) relative (~8% at k=14)
    assert np.all(np.abs(measured - predicted) <= 0.12 * predicted)


def test_origin_quadrature_rejects_grossly_unresolved_tail():
    # on a k_max = 8 grid the cubic state's k^-6 tail is ~7e-5 relative
    from tdpi.pointint import default_test_state

    psi = default_test_state(GRID)
    coarse = RadialGrid(r_max=8.0, n_points=641)
    with pytest.raises(TruncationError):
        values_at_origin(psi, np.array([0.1]), momentum_grid=coarse)
