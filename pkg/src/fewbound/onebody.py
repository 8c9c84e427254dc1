"""Single-particle central-potential spectra and cumulated independent-fermion
energies.

Solver: radial Schrodinger equation on a logarithmic grid (r = e^t,
u = e^{t/2} w), Numerov integration, node-counting bisection on the energy.
The node count of the outward solution equals the number of eigenvalues below
E (Sturm oscillation), so bisecting the jump point converges to the eigenvalue
of the truncated problem; the grid is then extended adaptively until the
eigenvalue is stable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from fewbound.potentials import PotentialSpec, evaluate

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    _HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        return wrap if not (args and callable(args[0])) else args[0]


@dataclass(frozen=True)
class RadialLevel:
    n: int  # radial node count
    l: int
    energy: float


@dataclass(frozen=True)
class CumulatedEnergy:
    n: int
    value: float
    filling: tuple[tuple[RadialLevel, int], ...]


class UnboundFillingError(RuntimeError):
    """Raised when the potential binds fewer particles than requested."""

    def __init__(self, requested: int, available: int):
        self.requested = requested
        self.available = available
        super().__init__(
            f"unbound filling: only {available} of {requested} particles fit in bound levels"
        )


@njit(cache=True)
def _numerov_nodes(p, q, energy, h, w0, w1):
    """Outward Numerov sweep of w'' = (p - E q) w; returns the node count."""
    n = p.size
    f_prev = 1.0 - h * h * (p[0] - energy * q[0]) / 12.0
    f_cur = 1.0 - h * h * (p[1] - energy * q[1]) / 12.0
    w_prev = w0
    w_cur = w1
    nodes = 0
    for i in range(2, n):
        f_next = 1.0 - h * h * (p[i] - energy * q[i]) / 12.0
        w_next = ((12.0 - 10.0 * f_cur) * w_cur - f_prev * w_prev) / f_next
        if w_next * w_cur < 0.0:
            nodes += 1
        mag = abs(w_next)
        if mag > 1e250:
            w_next /= mag
            w_cur /= mag
        w_prev, w_cur = w_cur, w_next
        f_prev, f_cur = f_cur, f_next
    return nodes


@njit(cache=True)
def _numerov_sweep(p, q, energy, h, w0, w1, forward):
    """Full Numerov solution (renormalized); forward=False integrates inward."""
    n = p.size
    w = np.zeros(n)
    if forward:
        idx = np.arange(n)
    else:
        idx = np.arange(n - 1, -1, -1)
    w[idx[0]] = w0
    w[idx[1]] = w1
    f_prev = 1.0 - h * h * (p[idx[0]] - energy * q[idx[0]]) / 12.0
    f_cur = 1.0 - h * h * (p[idx[1]] - energy * q[idx[1]]) / 12.0
    for j in range(2, n):
        i = idx[j]
        f_next = 1.0 - h * h * (p[i] - energy * q[i]) / 12.0
        w_new = ((12.0 - 10.0 * f_cur) * w[idx[j - 1]] - f_prev * w[idx[j - 2]]) / f_next
        w[i] = w_new
        mag = abs(w_new)
        if mag > 1e200:
            for jj in range(j + 1):
                w[idx[jj]] /= mag
        f_prev, f_cur = f_cur, f_next
    return w


class _RadialGrid:
    def __init__(self, spec: PotentialSpec, mass: float, l: int,
                 r_min: float, r_max: float, points: int):
        self.t = np.linspace(np.log(r_min), np.log(r_max), points)
        self.h = self.t[1] - self.t[0]
        self.r = np.exp(self.t)
        v = np.asarray(evaluate(spec, self.r), dtype=float)
        # w'' = (P - E Q) w with P = 2 m e^{2t} V + (l+1/2)^2, Q = 2 m e^{2t}
        self.q = 2.0 * mass * self.r**2
        self.p = self.q * v + (l + 0.5) ** 2
        self.v_eff = v + l * (l + 1) / (2.0 * mass * self.r**2)
        self.l = l
        self.mass = mass
        self.spec = spec

    def start_values(self) -> tuple[float, float]:
        # u ~ r^{l+1}(1 + c1 r) at the origin; c1 absorbs a Coulomb-like 1/r part
        v_m1 = 0.0
        for term in self.spec.terms:
            if term.kind == "coulomb":
                v_m1 += term.coupling * term.range_scale
            elif term.kind == "yukawa":
                v_m1 += term.coupling * term.range_scale
        c1 = self.mass * v_m1 / (self.l + 1)
        w = []
        for t in self.t[:2]:
            r = np.exp(t)
            w.append(np.exp((self.l + 0.5) * (t - self.t[0])) * (1.0 + c1 * r))
        return w[0], w[1]

    def count_nodes(self, energy: float) -> int:
        w0, w1 = self.start_values()
        return _numerov_nodes(self.p, self.q, energy, self.h, w0, w1)


def _bisect_level(grid: _RadialGrid, target_nodes: int, e_lo: float, e_hi: float) -> float:
    """Find the energy where the outward node count jumps past target_nodes."""
    lo, hi = e_lo, e_hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if grid.count_nodes(mid) > target_nodes:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def _points_for(spec, mass, l, r_min, r_max, e_span, min_points=8000):
    """Grid size keeping the Numerov factor 1 - h^2 W/12 safely positive."""
    t_span = np.log(r_max) - np.log(r_min)
    r_probe = np.exp(np.linspace(np.log(r_min), np.log(r_max), 400))
    q = 2.0 * mass * r_probe**2
    p = q * np.asarray(evaluate(spec, r_probe), dtype=float) + (l + 0.5) ** 2
    w_max = float(np.max(np.abs(p) + abs(e_span) * q))
    points = int(t_span * np.sqrt(max(w_max, 1.0) / 0.36)) + 1
    return min(max(points, min_points), 4_000_000)


def _analytic_floor(spec: PotentialSpec, mass: float) -> float:
    """Energy certainly below the whole spectrum: hydrogen-like bound for the
    1/r-singular attraction plus the total depth of the bounded wells."""
    c_sing = 0.0
    depth = 0.0
    for t in spec.terms:
        if t.kind in ("coulomb", "yukawa"):
            if t.coupling < 0:
                c_sing += -t.coupling * t.range_scale
        elif t.kind in ("gaussian", "exponential"):
            depth += max(0.0, -t.coupling)
        elif t.coupling < 0:
            raise ValueError("negative power-law coupling has no ground state")
    return -(2.0 * mass * c_sing**2 + 2.0 * depth + 1.0)


def _solve_on_grid(spec, mass, l, count, r_min, r_max, points, scale):
    grid = _RadialGrid(spec, mass, l, r_min, r_max, points)
    v_min = float(np.min(grid.v_eff))
    if v_min >= 0.0:
        e_floor = v_min - 1e-12 * max(1.0, v_min)
    else:
        e_floor = _analytic_floor(spec, mass)
    confining = spec.is_confining()

    energies = []
    if confining:
        e_top = v_min + max(1.0, abs(v_min))
        while grid.count_nodes(e_top) < count and e_top < 1e12:
            e_top = v_min + 2.0 * (e_top - v_min)
    else:
        e_top = 0.0
        count = min(count, grid.count_nodes(0.0))
    for n in range(count):
        lo = energies[-1] if energies else e_floor
        energies.append(_bisect_level(grid, n, lo, e_top))
    return energies, e_floor


def _wkb_extent(spec, mass, l, energy, scale) -> float:
    """Radius at which the decaying tail has accumulated ~45 e-folds past the
    outer classical turning point."""
    r = np.exp(np.linspace(np.log(1e-6 * scale), np.log(1e7 * scale), 4000))
    v_eff = np.asarray(evaluate(spec, r), dtype=float) + l * (l + 1) / (2.0 * mass * r**2)
    kappa_sq = 2.0 * mass * (v_eff - energy)
    allowed = np.nonzero(kappa_sq < 0)[0]
    start = int(allowed[-1]) + 1 if allowed.size else 0
    kappa = np.sqrt(np.clip(kappa_sq, 0.0, None))
    dr = np.diff(r, prepend=r[0])
    phase = np.cumsum(kappa * dr)
    phase = phase - (phase[start] if start < phase.size else 0.0)
    far = np.nonzero(phase >= 45.0)[0]
    r_max = r[far[0]] if far.size else r[-1]
    return float(max(r_max, 12.0 * scale))


def radial_spectrum(spec: PotentialSpec, mass: float, l: int, count: int,
                    rel_tol: float = 5e-9) -> list[RadialLevel]:
    """Lowest `count` radial levels for angular momentum l.

    For short-range potentials only genuinely bound levels (E < 0) are
    returned, possibly fewer than `count`.
    """
    if mass <= 0:
        raise ValueError("mass must be positive")
    if count < 1:
        raise ValueError("count must be >= 1")

    scale = min(t.range_scale for t in spec.terms)
    r_min = 1e-6 * scale

    # coarse pass to locate the top level, then a WKB-sized production grid
    r_max = 60.0 * scale
    e_guess = abs(_analytic_floor(spec, mass))
    points = _points_for(spec, mass, l, r_min, r_max, e_guess, min_points=4000)
    energies, e_floor = _solve_on_grid(spec, mass, l, count, r_min, r_max, points, scale)
    if not energies:
        return []

    prev: list[float] | None = None
    grow = 1.0
    for _ in range(8):
        r_max = grow * _wkb_extent(spec, mass, l, energies[-1], scale)
        e_span = max(abs(energies[-1]), abs(e_floor), 1.0)
        points = int(grow * _points_for(spec, mass, l, r_min, r_max, e_span))
        energies, e_floor = _solve_on_grid(spec, mass, l, count, r_min, r_max, points, scale)
        if not energies:
            return []
        if prev is not None and len(prev) == len(energies):
            scale_e = max(max(abs(e) for e in energies), 1e-300)
            if all(abs(a - b) <= rel_tol * scale_e for a, b in zip(prev, energies)):
                return [RadialLevel(n, l, e) for n, e in enumerate(energies)]
        prev = energies
        grow *= 1.5
        r_min *= 0.5
    raise RuntimeError(
        f"radial solver failed to converge with doubled grids (l={l}, count={count})"
    )


def radial_wavefunction(spec: PotentialSpec, mass: float, l: int, energy: float) -> tuple[np.ndarray, np.ndarray]:
    """Matched inward/outward radial function u(r) at a converged energy
    (unnormalized); used for node certificates."""
    scale = min(t.range_scale for t in spec.terms)
    r_min = 1e-6 * scale
    r_max = _wkb_extent(spec, mass, l, energy, scale)
    points = _points_for(spec, mass, l, r_min, r_max, abs(energy))
    grid = _RadialGrid(spec, mass, l, r_min, r_max, points)
    w0, w1 = grid.start_values()
    w_out = _numerov_sweep(grid.p, grid.q, energy, grid.h, w0, w1, True)
    w_in = _numerov_sweep(grid.p, grid.q, energy, grid.h, 0.0, 1e-12, False)
    wmat = grid.p - energy * grid.q
    turning = np.nonzero(wmat < 0)[0]
    m = int(turning[-1]) if turning.size else grid.t.size // 2
    ratio = w_out[m] / w_in[m] if w_in[m] != 0 else 1.0
    u = np.concatenate([w_out[: m + 1], w_in[m + 1 :] * ratio]) * np.exp(grid.t / 2)
    return grid.r, u


def count_radial_nodes(r: np.ndarray, u: np.ndarray) -> int:
    """Interior sign changes, ignoring the numerically dead tails."""
    umax = np.max(np.abs(u))
    live = np.abs(u) > 1e-9 * umax
    uu = u[live]
    return int(np.sum(uu[:-1] * uu[1:] < 0))


# ---------------------------------------------------------------------------
# Level gathering and fillings
# ---------------------------------------------------------------------------


def _gather_levels(spec, mass, n_slots_needed, capacity_of_l, l_max=12, n_max=12):
    """Collect levels in energy order until `n_slots_needed` capacity is safely
    covered: every l is explored until its lowest level clears the running
    Fermi energy."""
    levels: list[RadialLevel] = []
    per_l_counts = {}
    l = 0
    while l <= l_max:
        want = 2
        got: list[RadialLevel] = []
        while True:
            got = radial_spectrum(spec, mass, l, want)
            if len(got) < want or want >= n_max:
                break
            cap = sum(capacity_of_l(lev.l) for lev in levels + got)
            if cap >= n_slots_needed and got[-1].energy >= _fermi_guess(
                levels + got, n_slots_needed, capacity_of_l
            ):
                break
            want += 2
        levels.extend(got)
        per_l_counts[l] = len(got)
        if not got:
            break
        # stop opening new l channels once even the centrifugal-floor level
        # cannot be occupied
        if sum(capacity_of_l(lev.l) for lev in levels) >= n_slots_needed:
            fermi = _fermi_guess(levels, n_slots_needed, capacity_of_l)
            nxt = radial_spectrum(spec, mass, l + 1, 1)
            if not nxt or nxt[0].energy > fermi:
                break
        l += 1
    return _sorted_levels(levels)


def _sorted_levels(levels: list[RadialLevel]) -> list[RadialLevel]:
    """Energy-ordered levels with quasi-degenerate runs broken by (l, n), so
    fillings are deterministic across solver noise."""
    ordered = sorted(levels, key=lambda lev: lev.energy)
    if not ordered:
        return ordered
    scale = max(abs(ordered[0].energy), abs(ordered[-1].energy), 1e-300)
    tol = 1e-7 * scale
    out: list[RadialLevel] = []
    run: list[RadialLevel] = [ordered[0]]
    for lev in ordered[1:]:
        if lev.energy - run[-1].energy <= tol:
            run.append(lev)
        else:
            out.extend(sorted(run, key=lambda x: (x.l, x.n)))
            run = [lev]
    out.extend(sorted(run, key=lambda x: (x.l, x.n)))
    return out


def _fermi_guess(levels, n_slots, capacity_of_l):
    filled = 0
    for lev in _sorted_levels(levels):
        filled += capacity_of_l(lev.l)
        if filled >= n_slots:
            return lev.energy
    return np.inf


def cumulated_energy(spec: PotentialSpec, mass: float, n: int, omega: int) -> CumulatedEnergy:
    """Sum of the N lowest single-particle energies with per-level capacity
    omega*(2l+1); degenerate levels fill lower l first."""
    if n < 1:
        raise ValueError("need at least one particle")
    levels = _gather_levels(spec, mass, n, lambda l: omega * (2 * l + 1))
    filling = []
    value = 0.0
    remaining = n
    for lev in levels:
        if remaining == 0:
            break
        occ = min(omega * (2 * lev.l + 1), remaining)
        filling.append((lev, occ))
        value += occ * lev.energy
        remaining -= occ
    if remaining > 0:
        raise UnboundFillingError(n, n - remaining)
    return CumulatedEnergy(n, value, tuple(filling))


def cumulated_energy_spin_half(spec: PotentialSpec, mass: float, n: int, two_s: int) -> CumulatedEnergy:
    """Independent-fermion filling constrained to total spin S: (N-2S)/2
    orbitals doubly occupied, then 2S singly occupied orbitals."""
    if (n - two_s) % 2 != 0 or two_s < 0 or two_s > n:
        raise ValueError(f"2S={two_s} invalid for N={n}")
    n_orbitals = (n - two_s) // 2 + two_s
    levels = _gather_levels(spec, mass, 2 * n_orbitals, lambda l: 2 * (2 * l + 1))
    orbitals: list[RadialLevel] = []
    for lev in levels:
        orbitals.extend([lev] * (2 * lev.l + 1))
    orbitals = _sorted_levels(orbitals)
    if len(orbitals) < n_orbitals:
        raise UnboundFillingError(n, 2 * len(orbitals))
    n_double = (n - two_s) // 2
    value = 0.0
    occupancy: dict[RadialLevel, int] = {}
    for i, orb in enumerate(orbitals[:n_orbitals]):
        occ = 2 if i < n_double else 1
        value += occ * orb.energy
        occupancy[orb] = occupancy.get(orb, 0) + occ
    filling = tuple(sorted(occupancy.items(), key=lambda kv: (kv[0].energy, kv[0].l, kv[0].n)))
    return CumulatedEnergy(n, value, filling)
