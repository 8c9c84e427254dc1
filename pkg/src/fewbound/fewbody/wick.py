"""Gaussian-moment engine for correlated-Gaussian matrix elements.

Every matrix element reduces to expectations of products of dot products of
"global vectors" y_u = sum_k u_k x_k under a Gaussian weight exp(-x^T B x):
those are Wick sums over the per-component covariances kappa(u, v) =
(1/2) u^T B^{-1} v.  Pair potentials V(|y_w|) enter through conditioning on
rho = y_w: dots expand via y = beta*rho + z, z-contractions use the
conditional covariance, and |rho|^{2k} moments pick up radial integrals
M_k / (2k+1)!!.

The symbolic pass below runs once per (prefactor family, operator, N); the
result is a flat polynomial in covariance lookups evaluated by a batched
numeric kernel over many (basis pair, permutation) instances.
"""

from __future__ import annotations

from itertools import permutations, product

import numpy as np

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    _HAVE_NUMBA = False

RHO = -7  # sentinel label for the conditioned pair separation vector

# term during generation: (coeff, dots, kfac, efac, kpow)
Term = tuple[float, tuple, tuple, tuple, int]
# final monomial: (coeff, kfac, efac, kpow)
Monomial = tuple[float, tuple, tuple, int]


def _sorted_pair(a: int, b: int) -> tuple[int, int]:
    return (a, b) if a <= b else (b, a)


def wick_contract(terms: list[Term]) -> list[Monomial]:
    """Sum over perfect matchings of the dot slots.

    Pairing the two slots of one dot closes an index loop (factor 3); pairing
    across dots joins the partner slots into a new dot.  rho-rho pairings
    increment the radial-moment power, rho-z pairings vanish.
    """
    out: list[Monomial] = []
    stack = list(terms)
    while stack:
        coeff, dots, kfac, efac, kpow = stack.pop()
        if not dots:
            out.append((coeff, kfac, efac, kpow))
            continue
        (a, b), rest = dots[0], dots[1:]
        # slot a paired with its own partner b
        if a == RHO and b == RHO:
            stack.append((3.0 * coeff, rest, kfac, efac, kpow + 1))
        elif a != RHO and b != RHO:
            stack.append((3.0 * coeff, rest, kfac + (_sorted_pair(a, b),), efac, kpow))
        # slot a paired into another dot
        for idx, (p, q) in enumerate(rest):
            others = rest[:idx] + rest[idx + 1 :]
            for target, partner in ((p, q), (q, p)):
                if a == RHO and target == RHO:
                    stack.append(
                        (coeff, others + ((b, partner),), kfac, efac, kpow + 1)
                    )
                elif a != RHO and target != RHO:
                    stack.append(
                        (
                            coeff,
                            others + ((b, partner),),
                            kfac + (_sorted_pair(a, target),),
                            efac,
                            kpow,
                        )
                    )
    return consolidate(out)


def consolidate(monomials: list[Monomial]) -> list[Monomial]:
    acc: dict[tuple, float] = {}
    for coeff, kfac, efac, kpow in monomials:
        key = (tuple(sorted(kfac)), tuple(sorted(efac)), kpow)
        acc[key] = acc.get(key, 0.0) + coeff
    return [
        (c, kfac, efac, kpow)
        for (kfac, efac, kpow), c in sorted(acc.items(), key=lambda kv: kv[0])
        if abs(c) > 1e-9
    ]


def condition_on_pair(terms: list[Term]) -> list[Term]:
    """Expand every dot through y_i = beta_i rho + z_i.

    beta factors are recorded as kappa lookups (i, RHO); the numeric kappa
    table supplies the conditional covariance for regular pairs and beta in
    the RHO row/column.
    """
    out: list[Term] = []
    for coeff, dots, kfac, efac, kpow in terms:
        pieces_per_dot = []
        for (i, j) in dots:
            pieces_per_dot.append(
                [
                    ((RHO, RHO), (_sorted_pair(i, RHO), _sorted_pair(j, RHO))),
                    ((RHO, j), (_sorted_pair(i, RHO),)),
                    ((i, RHO), (_sorted_pair(j, RHO),)),
                    ((i, j), ()),
                ]
            )
        for combo in product(*pieces_per_dot):
            new_dots = tuple(piece[0] for piece in combo)
            extra = tuple(f for piece in combo for f in piece[1])
            out.append((coeff, new_dots, kfac + extra, efac, kpow))
    return out


# ---------------------------------------------------------------------------
# Contracted prefactor structures
# ---------------------------------------------------------------------------

FAMILY_VECTORS = {"scalar": 0, "vector": 1, "cross": 2, "triple": 3}
FAMILY_MAX_MOMENT = {"scalar": 0, "vector": 1, "cross": 2, "triple": 3}


def contracted_prefactors(family: str, bra: list[int], ket: list[int]) -> list[tuple[float, tuple]]:
    """Vector-index contraction of bra and ket angular prefactors as a sum of
    dot-product structures over the given labels."""
    if family == "scalar":
        return [(1.0, ())]
    if family == "vector":
        (a,), (c,) = bra, ket
        return [(1.0, ((a, c),))]
    if family == "cross":
        # (y_a x y_b).(y_c x y_d) = (a.c)(b.d) - (a.d)(b.c)
        (a, b), (c, d) = bra, ket
        return [(1.0, ((a, c), (b, d))), (-1.0, ((a, d), (b, c)))]
    if family == "triple":
        # det identity: [abc][def] = det of the 3x3 dot matrix
        terms = []
        for perm in permutations(range(3)):
            sign = _perm_sign(perm)
            dots = tuple((bra[i], ket[perm[i]]) for i in range(3))
            terms.append((float(sign), dots))
        return terms
    raise ValueError(f"unknown prefactor family {family!r}")


def _perm_sign(perm) -> int:
    sign = 1
    for i in range(len(perm)):
        for j in range(i + 1, len(perm)):
            if perm[i] > perm[j]:
                sign = -sign
    return sign


# ---------------------------------------------------------------------------
# Operator polynomials for one (family, n) combination
# ---------------------------------------------------------------------------


class LabelLayout:
    """Fixed label universe shared by the symbolic pass and the numeric
    V-stack builder: coordinates, bra/ket prefactor vectors, their
    width-matrix transforms, and the width-matrix columns."""

    def __init__(self, family: str, n: int):
        nv = FAMILY_VECTORS[family]
        self.family = family
        self.n = n
        self.nv = nv
        cursor = 0

        def take(count):
            nonlocal cursor
            labels = list(range(cursor, cursor + count))
            cursor += count
            return labels

        self.e = take(n)  # coordinate vectors
        self.bra = take(nv)  # bra prefactor vectors
        self.ket = take(nv)  # permuted ket prefactor vectors
        self.bra_t = take(nv)  # A_ket . bra vectors
        self.ket_t = take(nv)  # A_bra . ket vectors
        self.acol = take(n)  # columns of A_bra
        self.apcol = take(n)  # columns of permuted A_ket
        self.total = cursor
        self.rho_index = cursor  # numeric slot for RHO in the kappa table


def _relabel(dots: tuple, mapping: dict[int, int]) -> tuple:
    return tuple((mapping.get(i, i), mapping.get(j, j)) for (i, j) in dots)


def build_polynomials(family: str, n: int) -> dict:
    """Overlap / kinetic / potential monomials for one prefactor family."""
    lay = LabelLayout(family, n)
    base = contracted_prefactors(family, lay.bra, lay.ket)

    overlap_terms: list[Term] = [(c, dots, (), (), 0) for c, dots in base]

    kinetic_terms: list[Term] = []
    for c, dots in base:
        # 4 P_A P_B (A_bra x).(A_ket x) with x_l.x_m resolved through the
        # coordinate labels and the Euclidean factor (A e_l).(A' e_m)
        for l in range(n):
            for m in range(n):
                kinetic_terms.append(
                    (
                        4.0 * c,
                        dots + ((lay.e[l], lay.e[m]),),
                        (),
                        ((lay.acol[l], lay.apcol[m]),),
                        0,
                    )
                )
        # -2 (A_ket x).grad P_A  and  -2 (A_bra x).grad P_B
        for s, st in zip(lay.bra, lay.bra_t):
            kinetic_terms.append((-2.0 * c, _relabel(dots, {s: st}), (), (), 0))
        for t, tt in zip(lay.ket, lay.ket_t):
            kinetic_terms.append((-2.0 * c, _relabel(dots, {t: tt}), (), (), 0))
        # grad P_A . grad P_B
        for s in lay.bra:
            for t in lay.ket:
                efac = ((min(s, t), max(s, t)),)
                if (s, t) in dots or (t, s) in dots:
                    rest = tuple(d for d in dots if d not in ((s, t), (t, s)))
                    kinetic_terms.append((3.0 * c, rest, (), efac, 0))
                else:
                    partner = {}
                    rest = []
                    for (i, j) in dots:
                        if i in (s, t):
                            partner[i] = j
                        elif j in (s, t):
                            partner[j] = i
                        else:
                            rest.append((i, j))
                    kinetic_terms.append(
                        (c, tuple(rest) + ((partner[s], partner[t]),), (), efac, 0)
                    )

    potential_terms = condition_on_pair(overlap_terms)

    return {
        "layout": lay,
        "overlap": _pack(wick_contract(overlap_terms), lay),
        "kinetic": _pack(wick_contract(kinetic_terms), lay),
        "potential": _pack(wick_contract(potential_terms), lay),
    }


def _pack(monomials: list[Monomial], lay: LabelLayout):
    """Flatten monomials into padded index arrays for the numeric kernel."""
    t_count = len(monomials)
    if t_count == 0:
        raise ValueError("empty polynomial")
    kmax = max(len(m[1]) for m in monomials)
    emax = max(len(m[2]) for m in monomials)
    coeff = np.zeros(t_count)
    kidx = np.full((t_count, max(kmax, 1), 2), -1, dtype=np.int64)
    eidx = np.full((t_count, max(emax, 1), 2), -1, dtype=np.int64)
    kpow = np.zeros(t_count, dtype=np.int64)
    for t, (c, kfac, efac, kp) in enumerate(monomials):
        coeff[t] = c
        kpow[t] = kp
        for f, (i, j) in enumerate(kfac):
            a = lay.rho_index if i == RHO else i
            b = lay.rho_index if j == RHO else j
            kidx[t, f] = (a, b)
        for f, (i, j) in enumerate(efac):
            eidx[t, f] = (i, j)
    return coeff, kidx, eidx, kpow


_POLY_CACHE: dict[tuple[str, int], dict] = {}


def polynomials(family: str, n: int) -> dict:
    key = (family, n)
    if key not in _POLY_CACHE:
        _POLY_CACHE[key] = build_polynomials(family, n)
    return _POLY_CACHE[key]


# ---------------------------------------------------------------------------
# Numeric evaluation
# ---------------------------------------------------------------------------


def _poly_eval_py(coeff, kidx, eidx, kpow, kap, edot, mh):
    inst = kap.shape[0]
    out = np.zeros(inst)
    for t in range(coeff.size):
        v = coeff[t] * mh[:, kpow[t]].copy()
        for f in range(kidx.shape[1]):
            a, b = kidx[t, f]
            if a < 0:
                break
            v *= kap[:, a, b]
        for f in range(eidx.shape[1]):
            a, b = eidx[t, f]
            if a < 0:
                break
            v *= edot[:, a, b]
        out += v
    return out


if _HAVE_NUMBA:

    @njit(cache=True)
    def _poly_eval_jit(coeff, kidx, eidx, kpow, kap, edot, mh):  # pragma: no cover
        inst = kap.shape[0]
        out = np.zeros(inst)
        for x in range(inst):
            acc = 0.0
            for t in range(coeff.size):
                v = coeff[t] * mh[x, kpow[t]]
                for f in range(kidx.shape[1]):
                    a = kidx[t, f, 0]
                    if a < 0:
                        break
                    v *= kap[x, a, kidx[t, f, 1]]
                for f in range(eidx.shape[1]):
                    a = eidx[t, f, 0]
                    if a < 0:
                        break
                    v *= edot[x, a, eidx[t, f, 1]]
                acc += v
            out[x] = acc
        return out

    def poly_eval(poly, kap, edot, mh):
        coeff, kidx, eidx, kpow = poly
        return _poly_eval_jit(
            coeff, kidx, eidx, kpow,
            np.ascontiguousarray(kap), np.ascontiguousarray(edot),
            np.ascontiguousarray(mh),
        )

else:  # pragma: no cover

    def poly_eval(poly, kap, edot, mh):
        coeff, kidx, eidx, kpow = poly
        return _poly_eval_py(coeff, kidx, eidx, kpow, kap, edot, mh)
