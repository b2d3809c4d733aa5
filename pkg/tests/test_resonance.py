"""Tests for Birman-Schwinger resonance tuning and certificates.

The square well admits a closed-form zero-energy resonance condition:
the interior solution sin(sqrt(g) r)/r matches the exterior constant
iff sqrt(g) cos(sqrt(g)) = 0, so the first resonant coupling is
g* = pi^2/4.  That shooting condition is the independent oracle here;
the Birman-Schwinger route in the package never sees it.
"""

import math

import numpy as np
import pytest
from scipy.optimize import brentq

from tdpi.core import RadialGrid
from tdpi.resonance import (
    PotentialSpec,
    ResonanceCertificate,
    TuningFailed,
    UnsupportedShape,
    birman_schwinger_matrix,
    bottom_eigenpair,
    shooting_oracle_square_well,
    tune_to_resonance,
)


def test_shooting_oracle_root_is_pi_squared_over_four():
    root = brentq(shooting_oracle_square_well, 2.0, 3.0, xtol=1e-14)
    assert abs(root - math.pi**2 / 4) < 1e-12


def test_square_well_coupling_matches_shooting_oracle(square_cert):
    # Acceptance tolerance is 1e-6; the default grid sits well inside it.
    root = brentq(shooting_oracle_square_well, 2.0, 3.0, xtol=1e-14)
    assert abs(square_cert.potential.coupling - root) < 1e-6
    assert np.isclose(square_cert.potential.coupling, 2.467400973662734, atol=1e-12)


def test_square_certificate_is_valid(square_cert):
    assert abs(square_cert.bs_eigenvalue + 1.0) <= 1e-8
    assert square_cert.pairing > 1e-6
    assert square_cert.simple


def test_bump_certificate_is_valid(bump_cert):
    assert abs(bump_cert.bs_eigenvalue + 1.0) <= 1e-8
    assert bump_cert.pairing > 1e-6
    assert bump_cert.simple
    assert np.isclose(bump_cert.potential.coupling, 17.200896492227912, atol=1e-9)


def test_square_pairing_matches_analytic_value(square_cert):
    # Normalized zero-resonance profile of the unit square well pairs with
    # the uniform weight as 2*sqrt(2)/pi.
    assert abs(square_cert.pairing - 2 * math.sqrt(2) / math.pi) < 1e-7


def test_second_eigenvalue_ratio(square_cert):
    # Square-well BS eigenvalues at g* sit at -1/(2j-1)^2, so the next
    # one up from -1 is -1/9.
    lo, hi, _ = bottom_eigenpair(birman_schwinger_matrix(square_cert.potential))
    assert abs(lo + 1.0) <= 1e-8
    assert abs(hi / lo - 1.0 / 9.0) < 1e-6


def test_grid_halving_shifts_coupling_little():
    c1 = tune_to_resonance("square_well", grid=RadialGrid(1.0, 501))
    c2 = tune_to_resonance("square_well", grid=RadialGrid(1.0, 1001))
    assert np.isclose(c1.potential.coupling, 2.467399070970714, atol=1e-12)
    assert abs(c1.potential.coupling - c2.potential.coupling) < 1e-4


def test_custom_shape_tunes():
    grid = RadialGrid(1.0, 501)
    samples = -np.exp(-8.0 * grid.nodes**2)
    cert = tune_to_resonance(PotentialSpec("custom", 1.0, grid, samples=samples))
    assert abs(cert.bs_eigenvalue + 1.0) <= 1e-8
    assert cert.pairing > 1e-6
    assert np.isclose(cert.potential.coupling, 21.47558840, atol=1e-6)


def test_unknown_shape_rejected():
    grid = RadialGrid(1.0, 501)
    with pytest.raises(UnsupportedShape, match="volcano"):
        PotentialSpec(kind="volcano", coupling=1.0, grid=grid)


def test_custom_shape_requires_samples():
    grid = RadialGrid(1.0, 501)
    with pytest.raises(UnsupportedShape, match="samples"):
        PotentialSpec(kind="custom", coupling=1.0, grid=grid)


def test_tuning_failure_reported():
    with pytest.raises(TuningFailed, match="bracket"):
        tune_to_resonance("square_well", g_max=1.0)


def test_certificate_json_roundtrip(square_cert):
    clone = ResonanceCertificate.from_json(square_cert.to_json())
    assert clone.potential.kind == square_cert.potential.kind
    assert clone.potential.coupling == square_cert.potential.coupling
    assert clone.bs_eigenvalue == square_cert.bs_eigenvalue
    assert clone.pairing == square_cert.pairing
    assert clone.simple == square_cert.simple
    assert np.array_equal(clone.eigenvector, square_cert.eigenvector)
    assert clone.potential.grid.r_max == square_cert.potential.grid.r_max
    assert clone.potential.grid.n_points == square_cert.potential.grid.n_points
