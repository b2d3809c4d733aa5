"""Shared domain types, radial grids, and the s-wave Fourier (Hankel) transform pair.

Conventions used throughout the package:

* Fourier transform is unitary with the (2pi)^{-3/2} normalization,
  ``psihat(k) = (2pi)^{-3/2} \\int e^{-i k.x} psi(x) dx``.
* For rotation-invariant states this reduces to the self-inverse sine
  transform ``psihat(k) = sqrt(2/pi) k^{-1} \\int_0^inf psi(r) sin(kr) r dr``.
* L2 norms carry the 3D radial measure: ``||psi||^2 = 4pi \\int r^2 |psi(r)|^2 dr``
  (identical in momentum representation).

Grids are uniform with a node at the origin; quadrature is the trapezoid
rule.  Transforms are evaluated by direct summation (O(N^2)), which is exact
enough at desk scale and keeps the error budget transparent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np

__all__ = [
    "InvalidGrid",
    "TruncationError",
    "RadialGrid",
    "RadialWavefunction",
    "ChargeTrajectory",
    "BetaProfile",
    "stepify",
    "sqrt_pi_i",
    "trapezoid_weights",
    "l2_norm",
    "inner_product",
    "hankel_forward",
    "hankel_inverse",
    "default_momentum_grid",
]


class InvalidGrid(ValueError):
    """Raised for degenerate grids (too few nodes, nonpositive extent)."""


class TruncationError(ValueError):
    """Raised when samples have not decayed at the grid edge and a transform
    would silently alias the truncated tail."""


@dataclass(frozen=True)
class RadialGrid:
    """Uniform grid on [0, r_max] with ``n_points`` nodes, first node at 0.

    The same type serves position grids (radius r) and momentum grids
    (wavenumber k); only the interpretation differs.
    """

    r_max: float
    n_points: int

    def __post_init__(self) -> None:
        if self.n_points < 16:
            raise InvalidGrid(f"need at least 16 nodes, got {self.n_points}")
        if not (self.r_max > 0 and math.isfinite(self.r_max)):
            raise InvalidGrid(f"r_max must be positive and finite, got {self.r_max}")

    @property
    def spacing(self) -> float:
        return self.r_max / (self.n_points - 1)

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(0.0, self.r_max, self.n_points)


def trapezoid_weights(grid: RadialGrid) -> np.ndarray:
    """Trapezoid quadrature weights for ``\\int_0^{r_max} . dr`` on the grid."""
    w = np.full(grid.n_points, grid.spacing)
    w[0] *= 0.5
    w[-1] *= 0.5
    return w


def _radial_integral(grid: RadialGrid, integrand: np.ndarray) -> complex:
    """integral_0^{r_max} g(r) dr, robust to 1/r components in the states.

    Two refinements over the plain trapezoid sum.  (1) The r = 0 sample of a
    product like r^2 conj(a) b is 0 by construction even when the true
    integrand has a finite limit (states with a 1/r singular part); a cubic
    extrapolation through nodes 1..4 recovers it.  (2) Such integrands also
    have a nonzero endpoint slope, so the h^2/12 Euler-Maclaurin correction
    is applied with one-sided derivative estimates.  Both corrections are
    exact for cubics and O(h^4)-small noise for smooth radial states, whose
    trapezoid sum (all odd endpoint derivatives vanishing) is already
    superalgebraically accurate.
    """
    g = np.asarray(integrand, dtype=complex).copy()
    h = grid.spacing
    g[0] = 5.0 * g[1] - 10.0 * g[2] + 10.0 * g[3] - 5.0 * g[4] + g[5]
    d0 = (
        -25.0 * g[0] + 48.0 * g[1] - 36.0 * g[2] + 16.0 * g[3] - 3.0 * g[4]
    ) / (12.0 * h)
    dn = (
        25.0 * g[-1] - 48.0 * g[-2] + 36.0 * g[-3] - 16.0 * g[-4] + 3.0 * g[-5]
    ) / (12.0 * h)
    total = np.sum(g[1:-1]) + 0.5 * (g[0] + g[-1])
    return complex(h * total + (h * h / 12.0) * (d0 - dn))


def l2_norm(grid: RadialGrid, samples: np.ndarray) -> float:
    """3D radial L2 norm sqrt(4pi int r^2 |psi|^2 dr) on the grid."""
    r = grid.nodes
    val = _radial_integral(grid, r * r * (np.abs(samples) ** 2).astype(complex))
    return math.sqrt(max(4.0 * math.pi * val.real, 0.0))


def inner_product(grid: RadialGrid, a: np.ndarray, b: np.ndarray) -> complex:
    """3D radial inner product 4pi int r^2 conj(a) b dr (linear in b)."""
    r = grid.nodes
    return 4.0 * math.pi * _radial_integral(grid, r * r * np.conj(a) * b)


Representation = Literal["position", "momentum"]


@dataclass(frozen=True)
class RadialWavefunction:
    """Complex radial samples of a rotation-invariant 3D state.

    Immutable after construction; ``l2_norm`` is cached at build time and is
    always consistent with a recomputation from the samples.
    """

    grid: RadialGrid
    samples: np.ndarray
    representation: Representation = "position"
    l2_norm: float = field(init=False)

    def __post_init__(self) -> None:
        samples = np.asarray(self.samples, dtype=complex)
        if samples.shape != (self.grid.n_points,):
            raise InvalidGrid(
                f"samples shape {samples.shape} != grid size ({self.grid.n_points},)"
            )
        if not np.all(np.isfinite(samples.view(float))):
            raise ValueError("samples must be finite")
        samples = samples.copy()
        samples.flags.writeable = False
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "l2_norm", l2_norm(self.grid, samples))

    @classmethod
    def from_callable(
        cls,
        grid: RadialGrid,
        f: Callable[[np.ndarray], np.ndarray],
        representation: Representation = "position",
    ) -> "RadialWavefunction":
        return cls(grid, np.asarray(f(grid.nodes), dtype=complex), representation)

    def with_samples(self, samples: np.ndarray) -> "RadialWavefunction":
        """Same grid and representation, new samples."""
        return RadialWavefunction(self.grid, samples, self.representation)


@dataclass(frozen=True)
class ChargeTrajectory:
    """Time-sampled complex charge q(s + j h), j = 0..M.

    ``source`` records how the trajectory was produced: ``"exact_beta"`` for
    the continuous-profile equation, ``"step_beta(n)"`` for the n-interval
    step-profile approximation.
    """

    t_start: float
    step: float
    values: np.ndarray
    source: str = "exact_beta"

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=complex)
        if values.ndim != 1 or values.size < 1:
            raise ValueError("values must be a nonempty 1D sequence")
        if not np.all(np.isfinite(values.view(float))):
            raise ValueError("charge trajectory contains non-finite entries")
        if not (self.step > 0):
            raise ValueError(f"step must be positive, got {self.step}")
        values = values.copy()
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @property
    def times(self) -> np.ndarray:
        return self.t_start + self.step * np.arange(self.values.size)

    def at_end(self) -> complex:
        return complex(self.values[-1])


@dataclass(frozen=True)
class BetaProfile:
    """Interaction-strength profile beta(t).

    * ``cosine``: beta(t) = gamma_a + gamma_b cos(kappa (t - s))
    * ``constant``: beta(t) = gamma_a
    * ``step``: right-open piecewise constant, beta(t) = levels[j] on
      [breakpoints[j], breakpoints[j+1]); the last level extends to +inf.
    """

    kind: Literal["cosine", "constant", "step"]
    gamma_a: float = 0.0
    gamma_b: float = 0.0
    kappa: float = 1.0
    s: float = 0.0
    breakpoints: np.ndarray | None = None
    levels: np.ndarray | None = None

    def __post_init__(self) -> None:
        if self.kind == "cosine" and not (self.kappa > 0):
            raise ValueError(f"kappa must be positive, got {self.kappa}")
        if self.kind == "step":
            if self.breakpoints is None or self.levels is None:
                raise ValueError("step profile needs breakpoints and levels")
            bp = np.asarray(self.breakpoints, dtype=float)
            lv = np.asarray(self.levels, dtype=float)
            if bp.shape != lv.shape or bp.ndim != 1 or bp.size < 1:
                raise ValueError("breakpoints and levels must be matching 1D arrays")
            if np.any(np.diff(bp) <= 0):
                raise ValueError("breakpoints must be strictly increasing")
            bp = bp.copy()
            lv = lv.copy()
            bp.flags.writeable = False
            lv.flags.writeable = False
            object.__setattr__(self, "breakpoints", bp)
            object.__setattr__(self, "levels", lv)

    @classmethod
    def constant(cls, value: float, s: float = 0.0) -> "BetaProfile":
        return cls(kind="constant", gamma_a=value, s=s)

    @classmethod
    def cosine(
        cls, gamma_a: float, gamma_b: float, kappa: float, s: float = 0.0
    ) -> "BetaProfile":
        return cls(kind="cosine", gamma_a=gamma_a, gamma_b=gamma_b, kappa=kappa, s=s)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "constant":
            out = np.full_like(t, self.gamma_a)
        elif self.kind == "cosine":
            out = self.gamma_a + self.gamma_b * np.cos(self.kappa * (t - self.s))
        else:
            idx = np.searchsorted(self.breakpoints, t, side="right") - 1
            idx = np.clip(idx, 0, self.levels.size - 1)
            out = self.levels[idx]
        return out if out.ndim else float(out)

    def scaled(self, factor: float) -> "BetaProfile":
        """Profile for factor*beta(t); used to change strength normalization."""
        if self.kind == "step":
            return BetaProfile(
                kind="step",
                s=self.s,
                breakpoints=self.breakpoints,
                levels=factor * self.levels,
            )
        return BetaProfile(
            kind=self.kind,
            gamma_a=factor * self.gamma_a,
            gamma_b=factor * self.gamma_b,
            kappa=self.kappa,
            s=self.s,
        )


def stepify(profile: BetaProfile, n: int, t_end: float) -> BetaProfile:
    """Left-endpoint step sampling of ``profile`` on [s, t_end] with n equal
    intervals: breakpoints t_j = s + j (t_end - s)/n, levels beta(t_j)."""
    if n < 1:
        raise ValueError(f"need n >= 1 intervals, got {n}")
    if not (t_end > profile.s):
        raise ValueError("t_end must lie after the profile start time")
    t_j = profile.s + (t_end - profile.s) * np.arange(n) / n
    return BetaProfile(
        kind="step", s=profile.s, breakpoints=t_j, levels=np.asarray(profile(t_j))
    )


def sqrt_pi_i() -> complex:
    """The principal branch sqrt(pi i) = sqrt(pi) e^{i pi/4}; the charge
    equation's prefactor is 4 times this."""
    c = math.sqrt(math.pi / 2.0)
    return complex(c, c)


def default_momentum_grid(
    position_grid: RadialGrid, k_max: float = 16.0, spacing: float | None = None
) -> RadialGrid:
    """Momentum grid adequate for Gaussian-decay states on ``position_grid``.

    The spacing resolves the sin(k r_max) oscillation of the inverse
    transform (>= 20 nodes per period at r = r_max) unless overridden.
    """
    if spacing is None:
        spacing = min(0.0125, 2.0 * math.pi / position_grid.r_max / 20.0)
    n = int(math.ceil(k_max / spacing)) + 1
    return RadialGrid(r_max=spacing * (n - 1), n_points=n)


def _check_tail(psi: RadialWavefunction, what: str, rel_tol: float = 1e-6) -> None:
    mags = np.abs(psi.samples)
    scale = float(mags.max())
    if scale == 0.0:
        return
    if float(mags[-1]) > rel_tol * max(scale, 1.0):
        raise TruncationError(
            f"{what} samples have not decayed at the grid edge "
            f"(|tail| = {mags[-1]:.3e}, scale = {scale:.3e})"
        )


def _sine_transform(
    src_grid: RadialGrid, samples: np.ndarray, dst_grid: RadialGrid
) -> np.ndarray:
    """Self-inverse s-wave kernel: out(y) = sqrt(2/pi) y^-1 int src(x) sin(xy) x dx.

    The y = 0 node uses the limit sin(xy)/y -> x.  If the source has a 1/r
    singular component of strength s = lim x*src(x) != 0, the integrand
    x*src(x)*sin(xy) has endpoint slope s*y at x = 0 and the trapezoid sum
    undershoots by (h^2/12) s y; the Euler-Maclaurin correction below removes
    that error uniformly in y (it vanishes for smooth sources, where the
    extrapolated strength is ~0).
    """
    x = src_grid.nodes
    w = trapezoid_weights(src_grid)
    y = dst_grid.nodes
    fx = w * x * samples
    u = x * samples
    strength = 5.0 * u[1] - 10.0 * u[2] + 10.0 * u[3] - 5.0 * u[4] + u[5]
    em = (src_grid.spacing ** 2 / 12.0) * strength
    out = np.empty(dst_grid.n_points, dtype=complex)
    # direct summation; (n_y x n_x) kernel is fine at desk scale
    out[1:] = np.sin(np.outer(y[1:], x)) @ fx / y[1:] + em
    out[0] = np.sum(x * fx) + em
    return math.sqrt(2.0 / math.pi) * out


def hankel_forward(
    psi: RadialWavefunction,
    momentum_grid: RadialGrid | None = None,
    tail_tol: float = 1e-6,
) -> RadialWavefunction:
    """Unitary 3D Fourier transform of a radial state (position -> momentum).

    ``tail_tol`` is the relative magnitude allowed at the last node before a
    TruncationError; loosen it for states with slow algebraic decay whose
    truncated contribution to the quantity of interest is known to be small.
    """
    if psi.representation != "position":
        raise ValueError("hankel_forward expects a position-representation state")
    _check_tail(psi, "position", tail_tol)
    kgrid = momentum_grid if momentum_grid is not None else default_momentum_grid(psi.grid)
    return RadialWavefunction(
        kgrid, _sine_transform(psi.grid, psi.samples, kgrid), "momentum"
    )


def hankel_inverse(
    psihat: RadialWavefunction,
    position_grid: RadialGrid,
    tail_tol: float = 1e-6,
) -> RadialWavefunction:
    """Inverse transform (momentum -> position); same self-inverse kernel."""
    if psihat.representation != "momentum":
        raise ValueError("hankel_inverse expects a momentum-representation state")
    _check_tail(psihat, "momentum", tail_tol)
    return RadialWavefunction(
        position_grid, _sine_transform(psihat.grid, psihat.samples, position_grid), "position"
    )
