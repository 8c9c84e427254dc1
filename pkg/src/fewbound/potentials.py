"""Central pair potentials, coupling/mass rescaling, and the reduced radial
integrals that turn pair-potential expectations between correlated Gaussians
into one-dimensional closed forms.

Conventions (ħ = 1 throughout):
  yukawa       g * exp(-x)/x      x = r / range_scale
  gaussian     g * exp(-x^2)
  exponential  g * exp(-x)
  powerlaw     g * x^q            (q >= 1)
  coulomb      g / x
  harmonic_pair == powerlaw q=2
A negative coupling g makes the short-range kinds attractive; benchmark wells
are entered as e.g. coupling=-8 for "strength 8".
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial, gamma, pi, sqrt
from typing import Callable

import numpy as np
from scipy import integrate
from scipy.special import erfcx, roots_genlaguerre

from fewbound.symrep import SymmetrySector

KINDS = ("yukawa", "gaussian", "exponential", "powerlaw", "coulomb", "harmonic_pair")

# highest |rho|^{2k} moment the matrix elements ever request (triple-product
# prefactors on both sides)
MAX_MOMENT = 3


@dataclass(frozen=True)
class PotentialTerm:
    kind: str
    coupling: float
    range_scale: float = 1.0
    q: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown potential kind {self.kind!r}")
        if self.range_scale <= 0:
            raise ValueError("range_scale must be positive")
        if self.kind == "powerlaw":
            if self.q is None or self.q < 1:
                raise ValueError("powerlaw needs exponent q >= 1")
        elif self.kind == "harmonic_pair":
            object.__setattr__(self, "q", 2.0)
        elif self.q is not None:
            raise ValueError(f"kind {self.kind!r} takes no exponent")

    def scaled(self, factor: float) -> "PotentialTerm":
        return PotentialTerm(self.kind, self.coupling * factor, self.range_scale, self.q)


@dataclass(frozen=True)
class PotentialSpec:
    """Pair interaction as a sum of terms, evaluated at the distance r_ij."""

    terms: tuple[PotentialTerm, ...]

    def __post_init__(self):
        if len(self.terms) == 0:
            raise ValueError("potential needs at least one term")
        object.__setattr__(self, "terms", tuple(self.terms))

    def scaled(self, factor: float) -> "PotentialSpec":
        return PotentialSpec(tuple(t.scaled(factor) for t in self.terms))

    def is_confining(self) -> bool:
        """True if some power-law term grows with positive coupling."""
        return any(
            t.kind in ("powerlaw", "harmonic_pair") and t.coupling > 0 for t in self.terms
        )


def potential(kind: str, coupling: float, range_scale: float = 1.0, q: float | None = None) -> PotentialSpec:
    return PotentialSpec((PotentialTerm(kind, coupling, range_scale, q),))


def evaluate_term(term: PotentialTerm, r):
    """V(r) for one term; r may be a scalar or array, r >= 0 (r > 0 for the
    singular kinds)."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("r must be non-negative")
    x = r / term.range_scale
    g = term.coupling
    if term.kind == "yukawa":
        if np.any(r == 0):
            raise ValueError("yukawa is singular at r = 0")
        out = g * np.exp(-x) / x
    elif term.kind == "coulomb":
        if np.any(r == 0):
            raise ValueError("coulomb is singular at r = 0")
        out = g / x
    elif term.kind == "gaussian":
        out = g * np.exp(-(x**2))
    elif term.kind == "exponential":
        out = g * np.exp(-x)
    else:  # powerlaw / harmonic_pair
        out = g * x**term.q
    return out if out.shape else float(out)


def evaluate(spec: PotentialSpec | PotentialTerm, r):
    if isinstance(spec, PotentialTerm):
        return evaluate_term(spec, r)
    return sum(evaluate_term(t, r) for t in spec.terms)


def scale_coupling(energy_fn: Callable[[float, float], float], m: float, alpha: float) -> float:
    """Energy at constituent mass alpha*m from runs at mass m only.

    Uses E(alpha*m, g) = E(m, alpha*g) / alpha; `energy_fn(mass, gmul)` must
    return the energy at mass `mass` with every coupling multiplied by `gmul`.
    """
    if alpha <= 0:
        raise ValueError("mass scale factor must be positive")
    return energy_fn(m, alpha) / alpha


# ---------------------------------------------------------------------------
# Reduced radial integrals I_k(c) = int_0^inf V(r) r^(2+2k) exp(-c r^2) dr
# ---------------------------------------------------------------------------

_GL_NODES: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gen_laguerre(n: int) -> tuple[np.ndarray, np.ndarray]:
    if n not in _GL_NODES:
        _GL_NODES[n] = roots_genlaguerre(80, n)
    return _GL_NODES[n]


def _exp_gauss_moment(n: int, c, b: float) -> np.ndarray:
    """J_n = int_0^inf r^n exp(-c r^2 - b r) dr for array c > 0, scalar b > 0.

    Upward erfcx recursion is unstable once b^2 >> c, so large-z instances are
    evaluated with generalized Gauss-Laguerre instead (substituting t = b r).
    """
    c = np.atleast_1d(np.asarray(c, dtype=float))
    z = b / (2.0 * np.sqrt(c))
    out = np.empty_like(c)
    small = z <= 1.5

    if np.any(small):
        cs = c[small]
        j_prev2 = 0.5 * np.sqrt(pi / cs) * erfcx(z[small])  # J_0
        j_prev1 = (1.0 - b * j_prev2) / (2.0 * cs)  # J_1
        if n == 0:
            out[small] = j_prev2
        elif n == 1:
            out[small] = j_prev1
        else:
            for m in range(2, n + 1):
                j_cur = ((m - 1) * j_prev2 - b * j_prev1) / (2.0 * cs)
                j_prev2, j_prev1 = j_prev1, j_cur
            out[small] = j_prev1

    if np.any(~small):
        nodes, weights = _gen_laguerre(n)
        cl = c[~small, None]
        vals = np.exp(-cl * (nodes[None, :] / b) ** 2)
        out[~small] = (vals @ weights) / b ** (n + 1)
    return out


def radial_moment(term: PotentialTerm, c, k: int = 0) -> np.ndarray | float:
    """Closed form of int_0^inf V(r) r^(2+2k) exp(-c r^2) dr, vectorized in c."""
    if k < 0 or k > MAX_MOMENT:
        raise ValueError(f"moment order k={k} unsupported")
    c_arr = np.atleast_1d(np.asarray(c, dtype=float))
    if np.any(c_arr <= 0):
        raise ValueError("Gaussian width parameter c must be positive")
    g = term.coupling
    rho = term.range_scale
    if term.kind in ("powerlaw", "harmonic_pair"):
        a = (term.q + 2 * k + 3) / 2.0
        out = g * rho ** (-term.q) * gamma(a) / (2.0 * c_arr**a)
    elif term.kind == "coulomb":
        out = g * rho * factorial(k) / (2.0 * c_arr ** (k + 1))
    elif term.kind == "gaussian":
        ceff = c_arr + 1.0 / rho**2
        out = g * gamma(k + 1.5) / (2.0 * ceff ** (k + 1.5))
    elif term.kind == "exponential":
        out = g * _exp_gauss_moment(2 + 2 * k, c_arr, 1.0 / rho)
    else:  # yukawa
        out = g * rho * _exp_gauss_moment(1 + 2 * k, c_arr, 1.0 / rho)
    return out if np.ndim(c) else float(out[0])


def radial_moment_quad(term: PotentialTerm, c: float, k: int = 0) -> float:
    """Quadrature route for the same integral (adaptive Gauss-Kronrod on
    [0, inf)); kept independent of the closed forms as a cross-check."""
    if c <= 0:
        raise ValueError("Gaussian width parameter c must be positive")

    def integrand(r):
        return evaluate_term(term, r) * r ** (2 + 2 * k) * np.exp(-c * r**2)

    val, _ = integrate.quad(integrand, 0.0, np.inf, epsabs=1e-14, epsrel=1e-12, limit=400)
    return val


def reduced_radial_integral(term: PotentialTerm, c: float) -> float:
    """Matrix-element kernel int_0^inf V(r) r^2 exp(-c r^2) dr."""
    return float(radial_moment(term, float(c), 0))


def spec_radial_moments(spec: PotentialSpec, c, k_max: int) -> np.ndarray:
    """Stacked I_k(c), k = 0..k_max, summed over the terms of `spec`.

    Returns shape (len(c), k_max+1).
    """
    c_arr = np.atleast_1d(np.asarray(c, dtype=float))
    out = np.zeros((c_arr.size, k_max + 1))
    for k in range(k_max + 1):
        for term in spec.terms:
            out[:, k] += radial_moment(term, c_arr, k)
    return out


# ---------------------------------------------------------------------------
# System specification
# ---------------------------------------------------------------------------

Angular = tuple[int, int]  # (L, parity)

SCAN = "scan"


@dataclass(frozen=True)
class SystemSpec:
    """N identical particles of mass `mass` interacting through `potential`,
    restricted to permutation/spin sector `sector` and angular sector
    `angular` ((L, parity) or "scan")."""

    n: int
    mass: float
    potential: PotentialSpec
    sector: SymmetrySector
    angular: Angular | str = SCAN

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("need at least two particles")
        if self.n > 4:
            raise ValueError("the few-body solver supports N <= 4")
        if self.mass <= 0:
            raise ValueError("mass must be positive")
        if self.sector.n != self.n:
            raise ValueError(
                f"sector is for N={self.sector.n}, system has N={self.n}"
            )
        if self.angular != SCAN:
            L, parity = self.angular
            if L < 0 or parity not in (1, -1):
                raise ValueError(f"bad angular sector {self.angular}")
            object.__setattr__(self, "angular", (int(L), int(parity)))

    def with_coupling_factor(self, factor: float) -> "SystemSpec":
        return SystemSpec(self.n, self.mass, self.potential.scaled(factor), self.sector, self.angular)
