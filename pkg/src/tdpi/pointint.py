"""The effective point-interaction evolution U_eff and its diagnostics.

States in the operator domain decompose as psi = phi + q/(4 pi r) with a
regular part phi and a charge q.  The strength parameter beta used across
this package is normalized so that the attractive interaction (beta < 0) has
its bound state at energy E = -pi^2 beta^2 (equivalently the scattering
length is -1/(pi beta)).  In this normalization the self-adjointness
boundary condition on the regular part reads

    phi(0) = (beta / 4) q,

i.e. the coefficient profile entering the charge equation is b(t) =
beta(t)/4; `boundary_coefficient` performs the conversion.  (The factor 1/4
translates between the two common normalizations of the strength parameter:
with b itself as "beta" the bound state sits at -16 pi^2 b^2 instead.)

The evolved state is reconstructed from the charge via the ansatz

    psihat_t(k) = e^{-i k^2 (t-s)} psihat_s(k)
                  + i (2 pi)^{-3/2} \\int_s^t e^{-i k^2 (t-tau)} q(tau) dtau,

with one integration by parts in the Duhamel term: the boundary contribution
q(t)/(i k^2) is inverted analytically to the singular part q(t)/(4 pi r) and
the remainder (driven by dq/dtau, with q(s) = 0) is inverted numerically.
The r = 0 sample of a reconstructed state holds the regular part's value
(the singular part's origin node carries zero quadrature weight).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid
from scipy.special import sici, wofz

from .charge import AbelWeights, abel_transform, build_forcing, solve_charge
from .core import (
    BetaProfile,
    ChargeTrajectory,
    RadialGrid,
    RadialWavefunction,
    default_momentum_grid,
    hankel_inverse,
    inner_product,
    sqrt_pi_i,
    trapezoid_weights,
)
from .freeprop import evolve_free, to_momentum

__all__ = [
    "ChargeTooSmall",
    "NoBoundState",
    "ResolventPole",
    "DecomposedState",
    "BoundState",
    "DEFAULT_POSITION_GRID",
    "boundary_coefficient",
    "default_test_state",
    "evolve_point_interaction",
    "reconstruct_decomposed",
    "boundary_condition_residual",
    "bound_state",
    "survival_probability",
    "resolvent_apply",
]

DEFAULT_POSITION_GRID = RadialGrid(r_max=18.0, n_points=721)

_INV_TWO_PI_SQ = 1.0 / (2.0 * math.pi ** 2)  # sqrt(2/pi) * (2 pi)^{-3/2}


def default_test_state(grid: RadialGrid | None = None) -> RadialWavefunction:
    """The stock smooth initial state psi(r) = N r^3 exp(-r^2/2).

    Vanishes to third order at the origin (so the initial charge is zero and
    the early-time forcing is smooth) and is normalized to unit L2 norm on
    the given grid.
    """
    if grid is None:
        grid = DEFAULT_POSITION_GRID
    r = grid.nodes
    raw = RadialWavefunction(grid, (r**3 * np.exp(-0.5 * r * r)).astype(complex))
    return raw.with_samples(raw.samples / raw.l2_norm)


class ChargeTooSmall(ValueError):
    """Raised when a boundary residual is requested for negligible charge."""


class NoBoundState(ValueError):
    """Raised for beta >= 0, where the point interaction has no bound state."""


class ResolventPole(ZeroDivisionError):
    """Raised when lambda hits the resolvent pole beta + sqrt(lambda)/pi = 0."""


def boundary_coefficient(beta: float) -> float:
    """Coefficient b in the boundary condition phi(0) = b q for strength beta."""
    return beta / 4.0


@dataclass(frozen=True)
class DecomposedState:
    """Regular part phi, charge q and time t of an evolved domain element."""

    regular_part: RadialWavefunction
    charge: complex
    time: float


@dataclass(frozen=True)
class BoundState:
    """Normalized bound state of the static interaction with beta < 0."""

    beta: float
    energy: float
    wavefunction: RadialWavefunction


def _reconstruct(
    psi_s: RadialWavefunction,
    beta: BetaProfile,
    s: float,
    t: float,
    h: float,
    position_grid: RadialGrid | None = None,
    momentum_grid: RadialGrid | None = None,
):
    """Shared worker: solve the charge equation and rebuild psi_t and phi_t."""
    if position_grid is None:
        position_grid = (
            psi_s.grid if psi_s.representation == "position" else DEFAULT_POSITION_GRID
        )
    psihat = to_momentum(psi_s, momentum_grid)
    forcing = build_forcing(psihat, s, t, h)
    profile = beta.scaled(0.25)  # boundary-condition coefficient b(t) = beta(t)/4
    if abs(profile.s - s) > 1e-12:
        raise ValueError(f"profile start {beta.s} does not match window start {s}")
    traj = solve_charge(profile, forcing, h)
    q = traj.values

    free_hat = evolve_free(psihat, t - s)
    free_pos = hankel_inverse(free_hat, position_grid)

    # I(k) = int_s^t e^{-i k^2 (t - tau)} q'(tau) dtau, exact for the
    # piecewise-linear interpolant of q (Filon form): per step the phase may
    # rotate several radians at large k, and q has a sqrt cusp at tau = s, so
    # a plain trapezoid on q' loses accuracy on both ends of the k range
    k = free_hat.grid.nodes
    tau = traj.times
    k2 = k * k
    dq = np.diff(q)
    factor = np.ones(k.size, dtype=complex)
    nz = k2 > 0
    factor[nz] = (1.0 - np.exp(-1j * k2[nz] * h)) / (1j * k2[nz] * h)
    if dq.size:
        phases = np.exp(-1j * np.outer(k2, t - tau[1:]))
        big_i = factor * (phases @ dq)
    else:
        big_i = np.zeros(k.size, dtype=complex)

    # w(r) = -(2 pi^2)^{-1} r^{-1} int I(k) sin(kr)/k dk, smooth at k = 0 and r = 0
    r = position_grid.nodes
    w_k = trapezoid_weights(free_hat.grid)
    kernel = np.empty((r.size, k.size))
    kr = np.outer(r[1:], k[1:])
    kernel[1:, 1:] = np.sin(kr) / k[1:]
    kernel[1:, 0] = r[1:]
    kernel[0, :] = 1.0
    w_vals = -_INV_TWO_PI_SQ * (kernel @ (w_k * big_i))
    w_vals[1:] /= r[1:]

    # analytic completion of the k-integral beyond k_max: the non-oscillatory
    # component q'(t)/(i k^2) of I(k) has a 1/k^2 tail whose truncation would
    # bias phi near the origin by ~|q'(t)|/(2 pi^2 k_max); the remainder of I
    # oscillates like e^{-i k^2 (t-s)} and self-cancels.  With X = k_max r,
    # int_{k_max}^inf sin(kr)/k^3 dk = r^2 [sin X/(2X^2) + cos X/(2X)
    #                                       - (pi/2 - Si(X))/2].
    if dq.size >= 2:
        k_top = float(k[-1])
        qp_end = complex(dq[-1]) / h
        x = k_top * r[1:]
        si = sici(x)[0]
        j_tail = (
            np.sin(x) / (2.0 * x * x)
            + np.cos(x) / (2.0 * x)
            - 0.5 * (0.5 * math.pi - si)
        )
        tail = np.empty(r.size, dtype=complex)
        tail[1:] = (qp_end / 1j) * r[1:] * j_tail
        tail[0] = (qp_end / 1j) / k_top
        w_vals -= _INV_TWO_PI_SQ * tail

    phi = free_pos.samples + w_vals
    psi_t = phi.copy()
    psi_t[1:] += complex(q[-1]) / (4.0 * math.pi * r[1:])
    return (
        RadialWavefunction(position_grid, psi_t, "position"),
        RadialWavefunction(position_grid, phi, "position"),
        traj,
    )


def evolve_point_interaction(
    psi_s: RadialWavefunction,
    beta: BetaProfile,
    s: float,
    t: float,
    h: float,
    position_grid: RadialGrid | None = None,
    momentum_grid: RadialGrid | None = None,
) -> tuple[RadialWavefunction, ChargeTrajectory]:
    """Evolve psi_s under the time-dependent point interaction to time t.

    psi_s must have a finite value at the origin (the charge then starts at
    q(s) = 0); bound-state initial data is handled by `survival_probability`,
    which uses the dedicated nonvanishing-charge forcing.
    """
    psi_t, _, traj = _reconstruct(psi_s, beta, s, t, h, position_grid, momentum_grid)
    return psi_t, traj


def reconstruct_decomposed(
    psi_s: RadialWavefunction,
    beta: BetaProfile,
    s: float,
    t: float,
    h: float,
    position_grid: RadialGrid | None = None,
    momentum_grid: RadialGrid | None = None,
) -> DecomposedState:
    """Evolve like `evolve_point_interaction` but return (phi, q, t)."""
    _, phi, traj = _reconstruct(psi_s, beta, s, t, h, position_grid, momentum_grid)
    return DecomposedState(regular_part=phi, charge=traj.at_end(), time=t)


def _extrapolate_origin(phi: RadialWavefunction) -> complex:
    """Quadratic extrapolation of the regular part to r = 0 from nodes 1..3."""
    v = phi.samples
    return 3.0 * v[1] - 3.0 * v[2] + v[3]


def boundary_condition_residual(state: DecomposedState, beta_at_t: float) -> float:
    """Relative defect of the boundary condition phi(0) = (beta/4) q at time t.

    Returns |phi(0) - b q| / |b q| with b = boundary_coefficient(beta_at_t);
    for b = 0 (the free point) the residual degenerates to |phi(0)| / |q|.
    """
    q = complex(state.charge)
    if abs(q) <= 1e-10:
        raise ChargeTooSmall(f"|q| = {abs(q):.2e} too small for a residual")
    phi0 = _extrapolate_origin(state.regular_part)
    b = boundary_coefficient(beta_at_t)
    if b == 0.0:
        return abs(phi0) / abs(q)
    return abs(phi0 - b * q) / abs(b * q)


def bound_state(beta: float, grid: RadialGrid | None = None) -> BoundState:
    """Normalized bound state psi_b(r) ~ e^{pi beta r}/r for beta < 0.

    The analytic normalization sqrt(-beta/2) is rescaled so the grid L2 norm
    is exactly 1.  Energy: -pi^2 beta^2.
    """
    if beta >= 0:
        raise NoBoundState(f"no bound state for beta = {beta} >= 0")
    if grid is None:
        grid = DEFAULT_POSITION_GRID
    r = grid.nodes
    samples = np.zeros(grid.n_points, dtype=complex)
    samples[1:] = math.sqrt(-beta / 2.0) * np.exp(math.pi * beta * r[1:]) / r[1:]
    psi = RadialWavefunction(grid, samples, "position")
    psi = psi.with_samples(psi.samples / psi.l2_norm)
    return BoundState(beta=beta, energy=-math.pi ** 2 * beta ** 2, wavefunction=psi)


def _g_regular(u: np.ndarray, a: float, cb: float) -> np.ndarray:
    """Regular part of (U0(u) psi_b)(0) = cb/sqrt(pi i u) + g_regular(u)."""
    z = a * np.exp(3j * math.pi / 4.0) * np.sqrt(u)
    return -cb * a * wofz(z)


def _bound_free_overlap(u: float, a: float, cb: float) -> complex:
    """<psi_b, U0(u) psi_b> in closed form; equals 1 at u = 0."""
    if u == 0.0:
        return 1.0 + 0.0j
    p = 1j * u
    sqrt_p = np.exp(1j * math.pi / 4.0) * math.sqrt(u)
    big_w = wofz(a * np.exp(3j * math.pi / 4.0) * math.sqrt(u))
    return 4.0 * cb * cb * (
        math.pi * big_w * (1.0 / (2.0 * a) + p * a) - math.sqrt(math.pi) * sqrt_p
    )


def bound_state_forcing(beta0: float, h: float, n_steps: int) -> np.ndarray:
    """Charge-equation forcing for initial data equal to bound_state(beta0).

    The free-evolution value at the origin g(u) = (U0(u) psi_b)(0) has the
    closed form cb/sqrt(pi i u) - cb a e^{i a^2 u} erfc(a e^{i pi/4} sqrt(u))
    with a = -pi beta0, cb = sqrt(-beta0/2); the singular piece integrates
    against the Abel kernel to the constant 4 pi cb exactly, the regular
    remainder by product integration.  In particular f(s) = 4 pi cb = q(s).
    """
    if beta0 >= 0:
        raise NoBoundState(f"no bound state for beta = {beta0} >= 0")
    a = -math.pi * beta0
    cb = math.sqrt(-beta0 / 2.0)
    u = h * np.arange(n_steps + 1)
    f = 4.0 * sqrt_pi_i() * abel_transform(_g_regular(u, a, cb), h)
    return 4.0 * math.pi * cb + f


def survival_probability(
    beta: BetaProfile, t_grid, h: float = 1e-3
) -> np.ndarray:
    """P(t) = |<psi_b, psi_t>|^2 for initial data psi_b = bound_state(beta(s)).

    The overlap is evaluated from the ansatz directly:

        <psi_b, psi_t> = <psi_b, U0(t-s) psi_b> + i \\int_s^t g(t-tau) q(tau) dtau

    with g the same closed-form origin value as in the forcing; the singular
    part of g integrates against q with the Abel product weights, the regular
    part by trapezoid.  Requested times are snapped to the charge grid.
    """
    t_grid = np.atleast_1d(np.asarray(t_grid, dtype=float))
    s = beta.s
    if np.any(t_grid < s - 1e-12):
        raise ValueError("requested times precede the start time")
    b0 = float(beta(s))
    if b0 >= 0:
        raise NoBoundState(f"beta(s) = {b0} >= 0: no initial bound state")
    a = -math.pi * b0
    cb = math.sqrt(-b0 / 2.0)

    t_max = float(t_grid.max())
    if t_max == s:
        return np.ones(t_grid.size)
    n_steps = int(math.ceil((t_max - s) / h - 1e-12))
    forcing = bound_state_forcing(b0, h, n_steps)
    # A-stable scheme: the piecewise-linear product rule is weakly unstable
    # for strongly attractive driven profiles over long windows
    traj = solve_charge(beta.scaled(0.25), forcing, h, scheme="cq")
    q = traj.values
    u = h * np.arange(n_steps + 1)
    g_reg = _g_regular(u, a, cb)
    weights = AbelWeights(step=h, n_steps=n_steps)
    sing_coeff = cb / sqrt_pi_i()  # multiplies int (t-tau)^{-1/2} q(tau) dtau

    out = np.empty(t_grid.size)
    for i, t in enumerate(t_grid):
        m = int(round((t - s) / h))
        if m == 0:
            out[i] = 1.0
            continue
        free_term = _bound_free_overlap(m * h, a, cb)
        abel_q = np.dot(weights.row(m), q[: m + 1])
        reg = trapezoid(g_reg[: m + 1][::-1] * q[: m + 1], dx=h)
        overlap = free_term + 1j * (sing_coeff * abel_q + reg)
        out[i] = float(np.abs(overlap) ** 2)
    return out


def resolvent_apply(
    beta: float,
    lam: complex,
    psi: RadialWavefunction,
    momentum_grid: RadialGrid | None = None,
) -> RadialWavefunction:
    """(H_beta + lambda)^{-1} psi via the explicit rank-one formula.

    (H_beta + lambda)^{-1} psi = (-Delta + lambda)^{-1} psi
        + 4 (beta + sqrt(lambda)/pi)^{-1} G_lambda * (G_lambda, psi),

    with G_lambda(r) = e^{-sqrt(lambda) r}/(4 pi r), principal sqrt with
    positive real part, and the BILINEAR pairing (G, psi) = int G psi dx (no
    conjugation -- required for analyticity in lambda and for the adjoint
    relation R(lambda)* = R(conj lambda)).  The free resolvent acts in
    momentum space.  The prefactor is pinned by the spectral identity
    <psi_b, (H+lambda)^{-1} psi_b> = (lambda - pi^2 beta^2)^{-1} and vanishes
    in the free limit beta -> +inf.
    """
    if psi.representation != "position":
        raise ValueError("resolvent_apply expects a position-representation state")
    sqrt_lam = complex(np.sqrt(complex(lam)))
    if sqrt_lam.real <= 0:
        raise ValueError("need Re sqrt(lambda) > 0")
    pole = beta + sqrt_lam / math.pi
    if abs(pole) <= 1e-12 * max(1.0, abs(beta)):
        raise ResolventPole(f"lambda = {lam} sits on the resolvent pole")
    if momentum_grid is None:
        # States with a 1/r component transform to k^{-2} tails; a wide grid
        # keeps the truncated contribution below the spectral tolerances.
        momentum_grid = default_momentum_grid(psi.grid, k_max=32.0)
    psihat = to_momentum(psi, momentum_grid, tail_tol=1e-2)
    k = psihat.grid.nodes
    free_hat = psihat.with_samples(psihat.samples / (k * k + lam))
    free_pos = hankel_inverse(free_hat, psi.grid, tail_tol=1e-3)

    r = psi.grid.nodes
    g = np.zeros(psi.grid.n_points, dtype=complex)
    g[1:] = np.exp(-sqrt_lam * r[1:]) / (4.0 * math.pi * r[1:])
    pairing = inner_product(psi.grid, np.conj(g), psi.samples)  # bilinear (G, psi)
    out = free_pos.samples + (4.0 / pole) * pairing * g
    return RadialWavefunction(psi.grid, out, "position")
