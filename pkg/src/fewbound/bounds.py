"""Energy lower bounds on N-body ground states from (N-1)-body ingredients.

Every bound is assembled from exact rational coefficients (fractions.Fraction)
and caller-supplied subsystem energies; floats enter only when the report is
assembled.  Energy-function protocols:

  subsystem_energy(mass, coupling_factor)            naive / translation-invariant
  sector_energy(partition, mass, coupling_factor)    symmetry-resolved
  spin_energy(two_s, mass, coupling_factor)          spin-1/2 resolved

where `coupling_factor` multiplies every coupling of the parent pair
potential, and the energy returned is the lowest internal state of the
(N-1)-body system in that sector (any L^P).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from fewbound.onebody import CumulatedEnergy, cumulated_energy, cumulated_energy_spin_half, radial_spectrum
from fewbound.potentials import PotentialSpec, potential
from fewbound.symrep import Partition, SymmetrySector, branching


@dataclass(frozen=True)
class Ingredient:
    description: str
    mass: float
    coupling_factor: float
    energy: float
    weight_exact: Fraction | None
    weight: float


@dataclass(frozen=True)
class BoundReport:
    kind: str
    value: float
    ingredients: tuple[Ingredient, ...]
    exact_coefficients: tuple[Fraction, ...] = field(default_factory=tuple)

    def recomputed_value(self) -> float:
        return sum(ing.weight * ing.energy for ing in self.ingredients)

    def verify(self, tol: float = 1e-12) -> bool:
        ref = self.recomputed_value()
        return abs(self.value - ref) <= tol * max(abs(ref), 1.0)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "value": self.value,
            "exact_coefficients": [str(c) for c in self.exact_coefficients],
            "ingredients": [
                {
                    "description": ing.description,
                    "mass": ing.mass,
                    "coupling_factor": ing.coupling_factor,
                    "energy": ing.energy,
                    "weight_exact": None if ing.weight_exact is None else str(ing.weight_exact),
                    "weight": ing.weight,
                }
                for ing in self.ingredients
            ],
        }


def _one_term_report(kind, weight: Fraction, energy, mass, factor, label) -> BoundReport:
    ing = Ingredient(label, mass, factor, energy, weight, float(weight))
    return BoundReport(kind, float(weight) * energy, (ing,), (weight,))


def bound_naive(n: int, m: float, subsystem_energy: Callable[[float, float], float]) -> BoundReport:
    """E_N >= N/(N-2) * E_{N-1} at constituent mass (N-1)m/(N-2).

    The mass shift is realized through the coupling identity, so the energy
    function only ever runs at mass m with couplings scaled by (N-1)/(N-2).
    """
    if n < 3:
        raise ValueError("need N >= 3 (the decomposition divides by N-2)")
    alpha = Fraction(n - 1, n - 2)
    weight = Fraction(n, n - 2) / alpha  # = N/(N-1)
    energy = subsystem_energy(m, float(alpha))
    return _one_term_report(
        "naive", weight, energy, m, float(alpha),
        f"{n - 1}-body ground state, couplings x{alpha}",
    )


def bound_translation_invariant(n: int, m: float,
                                subsystem_energy: Callable[[float, float], float]) -> BoundReport:
    """E_N >= N/(N-2) * E_{N-1} at constituent mass N m/(N-1) (center-of-mass
    corrected decomposition)."""
    if n < 3:
        raise ValueError("need N >= 3 (the decomposition divides by N-2)")
    alpha = Fraction(n, n - 1)
    weight = Fraction(n, n - 2) / alpha  # = (N-1)/(N-2)
    energy = subsystem_energy(m, float(alpha))
    return _one_term_report(
        "translation_invariant", weight, energy, m, float(alpha),
        f"{n - 1}-body ground state, couplings x{alpha}",
    )


def bound_symmetry_resolved(n: int, sector: SymmetrySector | Partition, m: float,
                            sector_energy: Callable[[Partition, float, float], float]) -> BoundReport:
    """Symmetry-resolved bound: branching-weighted children of the orbital
    partition, each at couplings x N/(N-1)."""
    if n < 3:
        raise ValueError("need N >= 3")
    orbital = sector.orbital if isinstance(sector, SymmetrySector) else sector
    if orbital.n != n:
        raise ValueError(f"partition {orbital} is not a partition of N={n}")
    alpha = Fraction(n, n - 1)
    prefactor = Fraction(n, n - 2) / alpha  # = (N-1)/(N-2)
    table = branching(orbital)
    ingredients = []
    coeffs = []
    value = 0.0
    for child in table.children:
        weight = prefactor * child.weight
        energy = sector_energy(child.partition, m, float(alpha))
        value += float(weight) * energy
        coeffs.append(weight)
        ingredients.append(
            Ingredient(
                f"{n - 1}-body sector {child.partition} (lowest over L^P), couplings x{alpha}",
                m, float(alpha), energy, weight, float(weight),
            )
        )
    return BoundReport("symmetry_resolved", value, tuple(ingredients), tuple(coeffs))


def spin_half_coefficients(n: int, two_s: int) -> dict[int, Fraction]:
    """Exact weights of the child-spin energies in the spin-resolved bound;
    keys are the child 2S values."""
    if (n - two_s) % 2 != 0 or not 0 <= two_s <= n:
        raise ValueError(f"2S={two_s} invalid for N={n}")
    pref = Fraction(n - 1, n * (n - 2) * (two_s + 1))
    c_minus = Fraction(two_s, 2) * (n + two_s + 2)
    c_plus = Fraction(two_s + 2, 2) * (n - two_s)
    out: dict[int, Fraction] = {}
    if c_minus != 0:
        if two_s - 1 < 0:
            raise ArithmeticError("nonzero coefficient for a nonexistent spin sector")
        out[two_s - 1] = pref * c_minus
    if c_plus != 0:
        if two_s + 1 > n - 1:
            raise ArithmeticError("nonzero coefficient for a nonexistent spin sector")
        out[two_s + 1] = pref * c_plus
    return out


def bound_spin_half(n: int, two_s: int, m: float,
                    spin_energy: Callable[[int, float, float], float]) -> BoundReport:
    """Spin-1/2 fermion bound in terms of the neighboring-spin children at
    couplings x N/(N-1)."""
    if n < 3:
        raise ValueError("need N >= 3")
    coeffs = spin_half_coefficients(n, two_s)
    alpha = Fraction(n, n - 1)
    ingredients = []
    exact = []
    value = 0.0
    for child_two_s in sorted(coeffs):
        weight = coeffs[child_two_s]
        energy = spin_energy(child_two_s, m, float(alpha))
        value += float(weight) * energy
        exact.append(weight)
        ingredients.append(
            Ingredient(
                f"{n - 1}-body spin 2S={child_two_s}, couplings x{alpha}",
                m, float(alpha), energy, weight, float(weight),
            )
        )
    return BoundReport("spin_half", value, tuple(ingredients), tuple(exact))


def omega_partitions(n: int, omega: int) -> tuple[Partition, Partition | None]:
    """Favored and first-excited orbital partitions of the (N-1)-body system
    entering the omega-generalized bound."""
    nu = n // omega
    rows0 = [omega] * nu
    rem = n - nu * omega - 1
    if rem > 0:
        rows0.append(rem)
    elif rem < 0:  # remainder zero: the favored child loses a full row
        rows0 = [omega] * (nu - 1) + ([omega - 1] if omega > 1 else [])
    favored = Partition(tuple(r for r in rows0 if r > 0))
    rows1 = [omega] * (nu - 1) + [omega - 1, n - nu * omega]
    rows1 = [r for r in rows1 if r > 0]
    excited = Partition(tuple(rows1)) if rows1 and sum(rows1) == n - 1 else None
    return favored, excited


def bound_omega_general(n: int, omega: int, m: float, g: float,
                        e0: float, e1: float) -> BoundReport:
    """Bound for omega intrinsic states per particle: weighted favored and
    first-excited (N-1)-body orbital symmetries, energies supplied at
    couplings x N/(N-1)."""
    if n < 3 or omega < 1:
        raise ValueError("need N >= 3 and omega >= 1")
    nu = n // omega
    denom = 1 + omega + nu * omega - n
    if denom == 0:
        raise AssertionError("degenerate prefactor cannot occur for valid inputs")
    pref = Fraction(n - 1, n * (n - 2) * denom)
    c0 = Fraction((n - nu * omega) * (1 + omega + nu + nu * omega - n))
    c1 = Fraction(nu * (omega + 1) * (omega + nu * omega - n))
    alpha = Fraction(n, n - 1)
    favored, excited = omega_partitions(n, omega)
    ingredients = []
    exact = []
    value = 0.0
    for coeff, energy, label in ((c0, e0, f"favored {favored}"),
                                 (c1, e1, f"first excited {excited}")):
        weight = pref * coeff
        if weight == 0:
            continue
        value += float(weight) * energy
        exact.append(weight)
        ingredients.append(
            Ingredient(f"{n - 1}-body {label}, couplings x{alpha}",
                       m, float(alpha), energy, weight, float(weight))
        )
    return BoundReport("omega_general", value, tuple(ingredients), tuple(exact))


def bound_levy_leblond(n: int, m: float,
                       cumulated: Callable[[int, float], CumulatedEnergy]) -> BoundReport:
    """Independent-particle bound: E_N >= (N/2) f_{N-1} with single-particle
    mass (N-1)m in the parent pair potential."""
    if n < 2:
        raise ValueError("need N >= 2")
    weight = Fraction(n, 2)
    filling = cumulated(n - 1, (n - 1) * m)
    ing = Ingredient(
        f"cumulated energy of {n - 1} independent fermions at mass {(n - 1) * m:g}",
        (n - 1) * m, 1.0, filling.value, weight, float(weight),
    )
    return BoundReport("levy_leblond", float(weight) * filling.value, (ing,), (weight,))


# ---------------------------------------------------------------------------
# Power-law two-sided bounds
# ---------------------------------------------------------------------------


def bm_energy_scale(m: float, g: float, q: float) -> float:
    """Energy unit of the dimensionless reduction of sum p^2/2m + g sum r_ij^q."""
    return (2.0 * m) ** (-q / (q + 2.0)) * g ** (2.0 / (q + 2.0))


def bm_reference_potential(q: float) -> PotentialSpec:
    return potential("powerlaw", 1.0, q=q)


def bm_dimensionless_inputs(q: float, n: int, two_s: int | None = None) -> tuple[float, float]:
    """(f_N, E_2) of the calibrated convention: levels of h = 2p^2 + r^q
    (the two-body internal Hamiltonian), with an S-resolved filling when a
    spin sector is requested."""
    spec = bm_reference_potential(q)
    mass = 0.25  # p^2/(2*(1/4)) = 2 p^2
    e2 = radial_spectrum(spec, mass, 0, 1)[0].energy
    if two_s is None:
        f_n = cumulated_energy(spec, mass, n, 2).value
    else:
        f_n = cumulated_energy_spin_half(spec, mass, n, two_s).value
    return f_n, e2


def bound_basdevant_martin(n: int, q: float, f_n: float, e2: float, side: str) -> BoundReport:
    """Two-sided power-law bounds from independent-particle fillings; the two
    formulas swap roles at q = 2, where both become exact."""
    if q < 1:
        raise ValueError("power-law bounds require q >= 1")
    if side not in ("lower", "upper"):
        raise ValueError("side must be 'lower' or 'upper'")
    s = q + 2.0
    # the (q-4)/(q+2) expression is the lower side for q <= 2 and the upper
    # side beyond; "a_side" tracks whether the requested side uses it
    a_side = (q <= 2.0) == (side == "lower")
    if a_side:
        pre = 2.0 ** ((q - 4.0) / s)
        w_f = pre * n ** (2.0 / s)
        w_e2 = -pre * n ** ((4.0 - q) / s)
    else:
        pre = 2.0 ** (-q / s)
        w_f = pre * n ** (2.0 / s)
        w_e2 = -pre * n ** (q / s)
    value = w_f * f_n + w_e2 * e2
    ingredients = (
        Ingredient(f"f_{n} (independent-fermion filling of 2p^2+r^q, q={q:g})",
                   0.25, 1.0, f_n, None, w_f),
        Ingredient("two-body internal energy of the same convention",
                   0.25, 1.0, e2, None, w_e2),
    )
    return BoundReport(f"basdevant_martin_{side}", value, ingredients, ())
