"""Tests for coherent field profiles and the potential they induce.

The key identity: with the acoustic profile proportional to
lambda0(k)^{-1} What(sigma k) and the optic one to k What(sigma k), the
induced potential must come out as

    V(r, t) = (2 pi)^{3/2} (gamma_a + gamma_b cos kappa (t - s))
              * sigma^{-1} W(r / sigma),

so V factorizes in time as A(r) + B(r) cos kappa (t - s) with
B/A = gamma_b/gamma_a, A proportional to the certificate well with the
universal constant (2 pi)^{3/2}, and no support leakage beyond r = sigma.
"""

import math

import numpy as np
import pytest

from tdpi import qcfield
from tdpi.core import RadialGrid, TruncationError
from tdpi.resonance import evaluate_shape

GAMMA_A, GAMMA_B, KAPPA = -1.0, 0.5, 2.0


def _bump_fields(bump_cert, sigma=0.1):
    ff = qcfield.FormFactor(1.0)
    return ff, qcfield.build_fields(
        bump_cert, ff, sigma, GAMMA_A, GAMMA_B, KAPPA, s=0.0
    )


def test_form_factor_requires_square_integrability():
    with pytest.raises(ValueError, match="3/4"):
        qcfield.FormFactor(0.75)
    with pytest.raises(ValueError, match="3/4"):
        qcfield.FormFactor(0.0)


def test_form_factor_values():
    ff = qcfield.FormFactor(1.5)
    k = np.array([0.0, 1.0, 3.0])
    assert np.allclose(ff.lambda0(k), (1.0 + k**2) ** -1.5, atol=1e-15)
    assert ff.M == 1.5
    assert ff.j_star == 6.0 + 8.0 * 1.5


def test_form_factor_singular_is_value_error():
    # build_fields guards against a vanishing lambda0; the guard is
    # unreachable for the (1 + k^2)^{-m} family but callers may catch
    # it as a ValueError.
    assert issubclass(qcfield.FormFactorSingular, ValueError)


def test_field_norms_decrease_with_sigma(bump_cert):
    ff = qcfield.FormFactor(1.0)
    norms = [
        qcfield.build_fields(
            bump_cert, ff, sigma, GAMMA_A, GAMMA_B, KAPPA, s=0.0
        ).beta_field.l2_norm
        for sigma in (0.1, 0.2, 0.4)
    ]
    assert np.allclose(
        norms,
        [14.78570577836641, 10.455072810063506, 7.392852854011509],
        atol=1e-9,
    )
    assert norms[0] > norms[1] > norms[2]


def test_potential_factorizes_in_time(bump_cert):
    ff, fields = _bump_fields(bump_cert)
    rg = RadialGrid(1.0, 401)
    v_0 = qcfield.effective_potential(fields, ff, 0.0, rg)
    v_quarter = qcfield.effective_potential(fields, ff, math.pi / (2 * KAPPA), rg)
    v_half = qcfield.effective_potential(fields, ff, math.pi / KAPPA, rg)
    a = v_quarter
    b = 0.5 * (v_0 - v_half)
    t_check = 0.3
    v_check = qcfield.effective_potential(fields, ff, t_check, rg)
    residual = np.max(np.abs(v_check - (a + b * math.cos(KAPPA * t_check))))
    assert residual < 1e-9 * np.max(np.abs(v_check))

    mask = np.abs(a) > 1e-3 * np.max(np.abs(a))
    assert np.max(np.abs(b[mask] / a[mask] - GAMMA_B / GAMMA_A)) < 1e-6


def test_potential_reproduces_scaled_well(bump_cert):
    ff, fields = _bump_fields(bump_cert, sigma=0.1)
    rg = RadialGrid(1.0, 401)
    a = qcfield.effective_potential(fields, ff, math.pi / (2 * KAPPA), rg)
    well = bump_cert.potential.coupling * evaluate_shape(
        bump_cert.potential, rg.nodes / 0.1
    )
    signed = GAMMA_A * well / 0.1
    assert np.corrcoef(a, signed)[0, 1] > 0.99
    # the proportionality constant is (2 pi)^{3/2}
    core = rg.nodes / 0.1 <= 0.8
    ratio = a[core][1:] / signed[core][1:]
    assert ratio.min() > 15.74 and ratio.max() < 15.76
    assert abs((2 * math.pi) ** 1.5 - 15.749609945722419) < 1e-12


def test_no_support_leakage(bump_cert):
    ff, fields = _bump_fields(bump_cert, sigma=0.1)
    rg = RadialGrid(1.0, 401)
    v_0 = qcfield.effective_potential(fields, ff, 0.0, rg)
    outside = np.abs(v_0[rg.nodes > 1.5 * 0.1])
    assert outside.max() < 1e-6 * np.max(np.abs(v_0))  # measured 4.6e-7


def test_field_evolution_is_a_phase(bump_cert):
    _, fields = _bump_fields(bump_cert)
    later = qcfield.evolve_fields(fields, 0.7)
    assert np.array_equal(later.alpha.samples, fields.alpha.samples)
    assert np.isclose(later.beta_field.l2_norm, fields.beta_field.l2_norm, rtol=1e-14)
    # one full optic period restores the snapshot
    period = qcfield.evolve_fields(fields, 2.0 * math.pi / KAPPA)
    assert np.max(np.abs(period.beta_field.samples - fields.beta_field.samples)) < 1e-15


def test_slowly_decaying_transform_rejected(square_cert):
    # the square well's transform decays only like p^{-2}; the integrand
    # gate must refuse to evaluate the potential from its fields
    ff = qcfield.FormFactor(1.0)
    fields = qcfield.build_fields(
        square_cert, ff, 0.1, GAMMA_A, GAMMA_B, KAPPA, s=0.0
    )
    with pytest.raises(TruncationError, match="k_max"):
        qcfield.effective_potential(fields, ff, 0.0, RadialGrid(1.0, 401))


def test_field_csv_roundtrip(bump_cert, tmp_path):
    _, fields = _bump_fields(bump_cert, sigma=0.4)
    path = tmp_path / "fields.csv"
    qcfield.write_field_csv(fields, str(path))
    text = path.read_text(encoding="utf-8")
    lines = text.splitlines()
    assert lines[0] == "k,re_alpha,im_alpha,re_beta,im_beta"
    assert len(lines) == 1 + fields.alpha.grid.n_points
    table = np.loadtxt(str(path), delimiter=",", skiprows=1)
    assert np.array_equal(table[:, 0], fields.alpha.grid.nodes)
    assert np.allclose(
        table[:, 1] + 1j * table[:, 2], fields.alpha.samples, atol=0.0, rtol=1e-16
    )
    assert np.allclose(
        table[:, 3] + 1j * table[:, 4], fields.beta_field.samples, atol=0.0, rtol=1e-16
    )
