"""Classical coherent-field profiles and the effective potential they induce.

The acoustic field alpha couples through a form factor lambda0(k) with
dispersion omega(k) = k; the optic field beta couples through 1/k at the
fixed frequency kappa.  The coherent profiles are chosen so the particle
feels exactly a rescaled well:

    alpha(k) = (gamma_a sigma^2 / 2) lambda0(k)^{-1} What(sigma k),
    beta(k)  = (gamma_b sigma^2 / 2) k What(sigma k),

with What the (unitary-convention) radial Fourier transform of the
certificate's resonant well W = g* W0.  There is no back-reaction: alpha is
a constant of motion and beta only picks up the global phase e^{-i kappa
(t-s)}.  The induced potential

    V(r,t) = 2 Re[ int e^{-ik.x} lambda0 alpha d^3k
                   + e^{-i kappa (t-s)} int e^{-ik.x} k^{-1} beta d^3k ]

then evaluates, by inverting the transforms, to

    V(r,t) = (2 pi)^{3/2} (gamma_a + gamma_b cos kappa(t-s)) sigma^{-1} W(r/sigma),

i.e. beta(t) sigma^{-1} W(r/sigma) up to the constant (2 pi)^{3/2}: the
leading-order well emerges with amplitude proportional to sigma^{-1} under
this convention (the package treats the proportionality as an output to be
measured, not an input).  All 3D integrals are reduced to radial form,
int e^{-ik.x} F(|k|) d^3k = (4 pi / r) int_0^inf k sin(kr) F(k) dk.

Momentum truncation note: the square well's transform decays only like
p^{-2}, so field-side quadrature converges very slowly for it; the smooth
bump shape (superalgebraic decay) is the intended default for field
experiments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .core import (
    RadialGrid,
    RadialWavefunction,
    TruncationError,
    hankel_forward,
    trapezoid_weights,
)
from .resonance import ResonanceCertificate

__all__ = [
    "FormFactorSingular",
    "FormFactor",
    "ClassicalFieldPair",
    "default_field_momentum_grid",
    "build_fields",
    "evolve_fields",
    "effective_potential",
    "write_field_csv",
]


class FormFactorSingular(ValueError):
    """Raised when lambda0 vanishes somewhere on the momentum grid."""


@dataclass(frozen=True)
class FormFactor:
    """Acoustic form factor lambda0(k) = (1 + k^2)^{-m}.

    Square-integrability of lambda0 on R^3 requires m > 3/4 (and of
    k^{-1/2} lambda0 only m > 1/2); the polynomial-inverse bound
    1/lambda0 <= C (1 + k^2)^M holds with M = m and C = 1.
    """

    m: float = 1.0

    def __post_init__(self) -> None:
        if self.m <= 0.75:
            raise ValueError(
                f"need m > 3/4 for a square-integrable form factor, got {self.m}"
            )

    @property
    def M(self) -> float:
        return self.m

    @property
    def j_star(self) -> float:
        return 6.0 + 8.0 * self.M

    def lambda0(self, k: np.ndarray) -> np.ndarray:
        return (1.0 + np.asarray(k) ** 2) ** (-self.m)


@dataclass(frozen=True)
class ClassicalFieldPair:
    """Coherent acoustic/optic momentum profiles at the initial time s."""

    alpha: RadialWavefunction
    beta_field: RadialWavefunction
    sigma: float
    gamma_a: float
    gamma_b: float
    kappa: float
    s: float

    def __post_init__(self) -> None:
        if self.alpha.representation != "momentum" or (
            self.beta_field.representation != "momentum"
        ):
            raise ValueError("field profiles must be momentum-representation samples")
        if self.alpha.grid != self.beta_field.grid:
            raise ValueError("alpha and beta_field must share one momentum grid")


def default_field_momentum_grid(sigma: float, p_cut: float = 120.0) -> RadialGrid:
    """Momentum grid reaching sigma*k = p_cut, resolving radii up to ~1.

    The integrands depend on k only through What(sigma k); the smooth bump's
    transform envelope decays like e^{-sqrt(p)} and falls below 1.3e-7 of
    its peak by p = 120, an order of magnitude under the quadrature gate.
    The spacing keeps >= 20 nodes per sin(kr) period out to r = max(1,
    4 sigma).
    """
    if sigma <= 0:
        raise ValueError(f"need sigma > 0, got {sigma}")
    k_max = p_cut / sigma
    spacing = 2.0 * math.pi / (20.0 * max(1.0, 4.0 * sigma))
    n = int(math.ceil(k_max / spacing)) + 1
    return RadialGrid(r_max=spacing * (n - 1), n_points=n)


def build_fields(
    cert: ResonanceCertificate,
    ff: FormFactor,
    sigma: float,
    gamma_a: float,
    gamma_b: float,
    kappa: float,
    s: float,
    momentum_grid: RadialGrid | None = None,
) -> ClassicalFieldPair:
    """Coherent profiles that induce the rescaled well of the certificate."""
    if sigma <= 0:
        raise ValueError(f"need sigma > 0, got {sigma}")
    kgrid = momentum_grid if momentum_grid is not None else default_field_momentum_grid(sigma)
    k = kgrid.nodes
    lam = np.asarray(ff.lambda0(k), dtype=float)
    if np.any(lam == 0.0):
        raise FormFactorSingular("lambda0 vanishes on the momentum grid")
    # What(sigma k): transform the well once onto the scaled target grid
    well = RadialWavefunction(
        cert.potential.grid, cert.potential.values().astype(complex), "position"
    )
    scaled_targets = RadialGrid(r_max=sigma * kgrid.r_max, n_points=kgrid.n_points)
    w_hat = hankel_forward(well, scaled_targets, tail_tol=np.inf).samples.real
    alpha = (0.5 * gamma_a * sigma**2) * w_hat / lam
    beta = (0.5 * gamma_b * sigma**2) * k * w_hat
    return ClassicalFieldPair(
        alpha=RadialWavefunction(kgrid, alpha.astype(complex), "momentum"),
        beta_field=RadialWavefunction(kgrid, beta.astype(complex), "momentum"),
        sigma=sigma,
        gamma_a=gamma_a,
        gamma_b=gamma_b,
        kappa=kappa,
        s=s,
    )


def evolve_fields(fields: ClassicalFieldPair, t: float) -> ClassicalFieldPair:
    """Free field evolution from the pair's initial time s to t.

    No back-reaction: the acoustic profile is a constant of motion and the
    optic one picks up the global phase e^{-i kappa (t - s)}.  The result is
    a snapshot at time t (its `s` field still names the initial time).
    """
    phase = np.exp(-1j * fields.kappa * (t - fields.s))
    return replace(
        fields, beta_field=fields.beta_field.with_samples(phase * fields.beta_field.samples)
    )


def effective_potential(
    fields: ClassicalFieldPair,
    ff: FormFactor,
    t: float,
    r_grid: RadialGrid,
) -> np.ndarray:
    """Induced potential V(r,t) = 2 Re<lambda_x + optic | fields(t)> on r_grid.

    The k = 0 sample of the optic integrand k^{-1} beta is irrelevant (the
    radial integrand carries an explicit factor k); the quadrature is the
    trapezoid rule on the pair's momentum grid.
    """
    kgrid = fields.alpha.grid
    k = kgrid.nodes
    phase = complex(np.exp(-1j * fields.kappa * (t - fields.s)))
    f_optic = np.zeros(k.size, dtype=complex)
    f_optic[1:] = fields.beta_field.samples[1:] / k[1:]
    f_total = ff.lambda0(k) * fields.alpha.samples + phase * f_optic
    mags = np.abs(f_total)
    scale = float(mags.max())
    if scale > 0.0 and float(mags[-1]) > 1e-6 * scale:
        raise TruncationError(
            f"field integrand has not decayed at k_max (|tail| = {mags[-1]:.3e})"
        )
    w = trapezoid_weights(kgrid)
    weighted = w * k * f_total
    r = r_grid.nodes
    v = np.empty(r_grid.n_points)
    v[0] = 4.0 * math.pi * 2.0 * float(np.real(np.dot(k, weighted)))
    if r.size > 1:
        sines = np.sin(np.outer(r[1:], k))
        v[1:] = (8.0 * math.pi / r[1:]) * np.real(sines @ weighted)
    return v


def write_field_csv(fields: ClassicalFieldPair, path: str) -> None:
    """Write the snapshot table (k, Re alpha, Im alpha, Re beta, Im beta)."""
    a = fields.alpha.samples
    b = fields.beta_field.samples
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("k,re_alpha,im_alpha,re_beta,im_beta\n")
        for kk, aa, bb in zip(fields.alpha.grid.nodes, a, b):
            row = (kk, aa.real, aa.imag, bb.real, bb.imag)
            fh.write(",".join(format(x, ".17g") for x in row) + "\n")
