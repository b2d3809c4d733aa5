"""Zero-energy resonance certification via the s-wave Birman-Schwinger kernel.

An attractive compactly supported radial potential W = g W0 (shape W0 <= 0,
support in r <= 1) is zero-energy resonant when -1 is a simple eigenvalue of
the Birman-Schwinger operator sgn(W)|W|^{1/2} (-Delta)^{-1} |W|^{1/2} and the
eigenvector phi pairs nontrivially with |W|^{1/2}.  On the s-wave sector the
operator reduces, for radial functions with measure r^2 dr, to the kernel

    -v(r) K0(r, r') v(r'),    K0(r, r') = 1 / max(r, r'),   v = sqrt(|W|),

which we discretize as the symmetric Nystroem matrix
M_ij = -v(r_i) K0(r_i, r_j) v(r_j) sqrt(w_i w_j) r_i r_j on a uniform radial
grid (w = trapezoid weights); matrix eigenvectors psi map back to samples of
phi through phi_i = psi_i / (sqrt(w_i) r_i).

The matrix is linear in the coupling g (through |W|), so the bottom
eigenvalue is strictly decreasing in g and the resonant coupling g* is the
unique root of lambda_min(g) = -1, located here by bisection.  For the unit
square well the zero-energy shooting problem u'' = -g u on r < 1, u(0) = 0,
u'(1) = 0 gives the independent oracle root g* = pi^2/4.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse.linalg import eigsh

from .core import RadialGrid, trapezoid_weights

__all__ = [
    "UnsupportedShape",
    "TuningFailed",
    "PotentialSpec",
    "ResonanceCertificate",
    "DEFAULT_RESONANCE_GRID",
    "evaluate_shape",
    "birman_schwinger_matrix",
    "bottom_eigenpair",
    "tune_to_resonance",
    "shooting_oracle_square_well",
]

DEFAULT_RESONANCE_GRID = RadialGrid(r_max=1.0, n_points=2001)

_NAMED_SHAPES = ("square_well", "smooth_bump")


class UnsupportedShape(ValueError):
    """Raised for shapes outside the attractive compactly supported class."""


class TuningFailed(RuntimeError):
    """Raised when no resonant coupling is bracketed in (0, g_max]."""


@dataclass(frozen=True)
class PotentialSpec:
    """Radial potential W(r) = coupling * W0(r) with fixed shape W0 <= 0.

    kind is one of "square_well" (W0 = -1 on r <= 1), "smooth_bump"
    (W0 = -exp(1/(r^2-1)) on r < 1) or "custom" with explicit shape samples
    on the grid nodes.
    """

    kind: str
    coupling: float
    grid: RadialGrid
    samples: np.ndarray | None = None

    def __post_init__(self) -> None:
        if self.kind not in _NAMED_SHAPES + ("custom",):
            raise UnsupportedShape(f"unknown shape kind {self.kind!r}")
        if self.kind == "custom":
            if self.samples is None:
                raise UnsupportedShape("custom shape requires samples")
            s = np.asarray(self.samples, dtype=float)
            if s.shape != (self.grid.n_points,):
                raise UnsupportedShape("custom samples must match the grid")
            if np.any(s > 0.0):
                raise UnsupportedShape("sign-changing/repulsive W not supported")
            if np.any((self.grid.nodes > 1.0) & (s != 0.0)):
                raise UnsupportedShape("shape must be supported in r <= 1")
            object.__setattr__(self, "samples", s)
        if self.grid.r_max < 1.0:
            raise UnsupportedShape("grid must cover the unit support r <= 1")

    def shape_values(self) -> np.ndarray:
        """Samples of the unscaled shape W0 on the grid nodes."""
        return evaluate_shape(self, self.grid.nodes)

    def values(self) -> np.ndarray:
        """Samples of the full potential g * W0 on the grid nodes."""
        return self.coupling * self.shape_values()


def evaluate_shape(spec: PotentialSpec, r: np.ndarray) -> np.ndarray:
    """Shape W0 evaluated at arbitrary radii (custom shapes interpolate)."""
    r = np.asarray(r, dtype=float)
    out = np.zeros(r.shape, dtype=float)
    if spec.kind == "square_well":
        out[r <= 1.0] = -1.0
    elif spec.kind == "smooth_bump":
        inside = r < 1.0
        ri = r[inside]
        out[inside] = -np.exp(1.0 / (ri * ri - 1.0))
    else:
        out = np.interp(r, spec.grid.nodes, spec.samples, left=0.0, right=0.0)
    return out


def birman_schwinger_matrix(pot: PotentialSpec) -> np.ndarray:
    """Symmetric s-wave Birman-Schwinger matrix at zero energy.

    M_ij = -v(r_i) K0(r_i, r_j) v(r_j) sqrt(w_i w_j) r_i r_j with
    K0 = 1/max(r, r'); rows and columns outside the support vanish.  The
    matrix is negative semidefinite and linear in the coupling.
    """
    w_vals = pot.values()
    r = pot.grid.nodes
    v = np.sqrt(-w_vals)
    s = v * np.sqrt(trapezoid_weights(pot.grid)) * r
    denom = np.maximum.outer(r, r)
    denom[0, 0] = 1.0  # 0/0 guard; the s_0 = 0 factor kills the entry anyway
    return -np.outer(s, s) / denom


def bottom_eigenpair(matrix: np.ndarray) -> tuple[float, float, np.ndarray]:
    """(lowest eigenvalue, next eigenvalue, eigenvector of the lowest)."""
    vals, vecs = eigsh(matrix, k=2, which="SA", tol=0.0)
    order = np.argsort(vals)
    lo, hi = vals[order[0]], vals[order[1]]
    vec = vecs[:, order[0]]
    return float(lo), float(hi), vec


@dataclass(frozen=True)
class ResonanceCertificate:
    """Evidence that potential.coupling puts the shape at zero-energy resonance.

    eigenvector holds radial samples of phi normalized to unit L2(r^2 dr)
    quadrature norm; pairing = integral of v phi r^2 dr.  The certificate is
    valid iff the bottom Birman-Schwinger eigenvalue is -1 within 1e-8, the
    pairing is nonzero (|pairing| > 1e-6) and the eigenvalue is simple
    (gap to the next one > 1e-6).
    """

    potential: PotentialSpec
    bs_eigenvalue: float
    eigenvector: np.ndarray
    pairing: float
    simple: bool

    def is_valid(self) -> bool:
        return (
            abs(self.bs_eigenvalue + 1.0) <= 1e-8
            and abs(self.pairing) > 1e-6
            and self.simple
        )

    def to_json(self) -> str:
        return json.dumps(
            {
                "shape": self.potential.kind,
                "coupling": self.potential.coupling,
                "bs_eigenvalue": self.bs_eigenvalue,
                "pairing": self.pairing,
                "simple": self.simple,
                "grid": {
                    "r_max": self.potential.grid.r_max,
                    "n_points": self.potential.grid.n_points,
                },
                "eigenvector": self.eigenvector.tolist(),
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "ResonanceCertificate":
        d = json.loads(text)
        grid = RadialGrid(r_max=d["grid"]["r_max"], n_points=d["grid"]["n_points"])
        pot = PotentialSpec(kind=d["shape"], coupling=d["coupling"], grid=grid)
        return cls(
            potential=pot,
            bs_eigenvalue=d["bs_eigenvalue"],
            eigenvector=np.asarray(d["eigenvector"], dtype=float),
            pairing=d["pairing"],
            simple=d["simple"],
        )


def _certificate_from_matrix(pot: PotentialSpec) -> ResonanceCertificate:
    lo, hi, psi = bottom_eigenpair(birman_schwinger_matrix(pot))
    r = pot.grid.nodes
    sqw = np.sqrt(trapezoid_weights(pot.grid))
    # matrix eigenvector -> phi samples; phi := 0 at r = 0 (zero row anyway)
    phi = np.zeros_like(psi)
    phi[1:] = psi[1:] / (sqw[1:] * r[1:])
    v = np.sqrt(-pot.values())
    pairing = float(np.dot(sqw * r * v, psi))  # = int v phi r^2 dr
    if pairing < 0.0:  # ground state of a positivity-improving kernel
        phi, psi, pairing = -phi, -psi, -pairing
    return ResonanceCertificate(
        potential=pot,
        bs_eigenvalue=lo,
        eigenvector=phi,
        pairing=pairing,
        simple=bool(hi - lo > 1e-6),
    )


def tune_to_resonance(
    shape: str | PotentialSpec,
    grid: RadialGrid | None = None,
    g_max: float = 100.0,
) -> ResonanceCertificate:
    """Bisect the coupling until the bottom BS eigenvalue is -1 within 1e-10.

    The bottom eigenvalue decreases strictly (linearly) in g, so a sign
    change of lambda_min(g) + 1 brackets the resonant coupling.
    """
    if isinstance(shape, PotentialSpec):
        base = shape
        if grid is None:
            grid = base.grid
    else:
        if grid is None:
            grid = DEFAULT_RESONANCE_GRID
        base = PotentialSpec(kind=shape, coupling=1.0, grid=grid)

    def bottom(g: float) -> float:
        pot = PotentialSpec(kind=base.kind, coupling=g, grid=grid, samples=base.samples)
        return bottom_eigenpair(birman_schwinger_matrix(pot))[0]

    g_lo, g_hi = 0.0, 1.0
    val = bottom(g_hi)
    while val > -1.0:
        g_lo, g_hi = g_hi, 2.0 * g_hi
        if g_hi > g_max:
            raise TuningFailed(f"no resonance bracketed in (0, {g_max}]")
        val = bottom(g_hi)

    for _ in range(200):
        g_mid = 0.5 * (g_lo + g_hi)
        val = bottom(g_mid)
        if abs(val + 1.0) <= 1e-10:
            break
        if val > -1.0:
            g_lo = g_mid
        else:
            g_hi = g_mid
    else:
        raise TuningFailed("bisection did not reach |lambda_min + 1| <= 1e-10")

    pot = PotentialSpec(kind=base.kind, coupling=g_mid, grid=grid, samples=base.samples)
    return _certificate_from_matrix(pot)


def shooting_oracle_square_well(g: float) -> float:
    """Resonance indicator sqrt(g) cos(sqrt(g)) for the unit square well.

    The zero-energy s-wave interior solution of u'' = -g u with u(0) = 0 is
    u = sin(sqrt(g) r); a zero-energy resonance requires u'(1) = 0, so the
    indicator vanishes exactly at g = pi^2/4 (and at the higher thresholds
    (2j-1)^2 pi^2/4).
    """
    if g <= 0.0:
        raise ValueError(f"need an attractive coupling g > 0, got {g}")
    root = math.sqrt(g)
    return root * math.cos(root)
