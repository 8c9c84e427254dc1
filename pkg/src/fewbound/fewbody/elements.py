"""Batched (anti)symmetrized matrix elements between correlated-Gaussian
basis elements.

A basis element is exp(-sum_{i<j} alpha_ij r_ij^2) times an angular prefactor
(scalar, one global vector, a cross product of two, or a triple product of
three) and a spin primitive.  The (anti)symmetrizer is applied to the ket:
sum over all N! permutations of sign * spin overlap * spatial element, with
the spatial integrals evaluated by the Wick polynomials.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import pi

import numpy as np

from fewbound.fewbody import kernels, wick
from fewbound.fewbody.jacobi import frame
from fewbound.fewbody.spin import SpinSpace
from fewbound.fewbody.wick import FAMILY_MAX_MOMENT, FAMILY_VECTORS
from fewbound.potentials import SystemSpec, spec_radial_moments

_DOUBLE_FACT = np.array([1.0, 3.0, 15.0, 105.0])

ANGULAR_FAMILY = {
    (0, 1): "scalar",
    (1, -1): "vector",
    (1, 1): "cross",
    (0, -1): "triple",
}
FAMILY_ANGULAR = {v: k for k, v in ANGULAR_FAMILY.items()}

_CHUNK = 65536


@dataclass
class GaussianBasisElement:
    """pair widths alpha_ij (ordered like frame.pairs), prefactor family with
    its unit global vectors, and a spin primitive in the 2^N product basis."""

    alphas: np.ndarray
    family: str
    vectors: np.ndarray  # (n_vectors, N-1); empty for scalar
    chi: np.ndarray

    def __post_init__(self):
        self.alphas = np.asarray(self.alphas, dtype=float)
        self.vectors = np.atleast_2d(np.asarray(self.vectors, dtype=float))
        if self.vectors.size == 0:
            self.vectors = self.vectors.reshape(0, 0)
        self.chi = np.asarray(self.chi, dtype=float)
        if np.any(self.alphas <= 0):
            raise ValueError("pair widths must be positive")
        nv = FAMILY_VECTORS[self.family]
        if self.vectors.shape[0] != nv:
            raise ValueError(
                f"family {self.family!r} needs {nv} global vectors, got {self.vectors.shape[0]}"
            )
        for v in self.vectors:
            norm = np.linalg.norm(v)
            if norm == 0:
                raise ValueError("zero prefactor vector")
            v /= norm


class SectorContext:
    """Everything fixed across one sector's matrix elements: geometry,
    permutation action, spin space, potential, and the Wick polynomials."""

    def __init__(self, system: SystemSpec, family: str):
        n = system.n
        nv = FAMILY_VECTORS[family]
        if nv > n - 1:
            raise ValueError(
                f"prefactor family {family!r} needs {nv} independent Jacobi "
                f"vectors; N={n} has {n - 1}"
            )
        self.system = system
        self.family = family
        self.frame = frame(n)
        self.n_jacobi = n - 1
        self.spin = SpinSpace(system.sector, self.frame.permutations)
        self.polys = wick.polynomials(family, self.n_jacobi)
        self.kmax = FAMILY_MAX_MOMENT[family]
        self.signs = (
            self.frame.perm_signs
            if self.spin.sign < 0
            else np.ones_like(self.frame.perm_signs)
        )
        self.orth = self.frame.perm_orthogonal  # (P, n-1, n-1)
        self.n_perm = len(self.frame.permutations)
        lay = self.polys["layout"]
        self.label_arrays = tuple(
            np.asarray(arr, dtype=np.int64)
            for arr in (lay.e, lay.bra, lay.ket, lay.bra_t, lay.ket_t, lay.acol, lay.apcol)
        )

    def widths(self, element: GaussianBasisElement) -> np.ndarray:
        return self.frame.widths_matrix(element.alphas)


@dataclass
class Block:
    """Permutation-summed sector matrices between two element lists."""

    s: np.ndarray
    t: np.ndarray
    v: np.ndarray
    s_scale: np.ndarray  # sum of |permutation contributions|, cancellation gauge

    @property
    def h(self) -> np.ndarray:
        return self.t + self.v


def compute_block(ctx: SectorContext, bras: list[GaussianBasisElement],
                  kets: list[GaussianBasisElement],
                  use_kernel: bool = True) -> Block:
    nb, nk, np_ = len(bras), len(kets), ctx.n_perm
    n = ctx.n_jacobi
    lay = ctx.polys["layout"]
    nv = lay.nv

    a_bra = np.stack([ctx.widths(e) for e in bras])  # (nb, n, n)
    a_ket = np.stack([ctx.widths(e) for e in kets])  # (nk, n, n)
    # permuted ket data: A' = O^T A O, u' = O^T u
    a_ketp = np.einsum("pnm,knl,plq->kpmq", ctx.orth, a_ket, ctx.orth, optimize=True)
    u_bra = np.zeros((nb, nv, n))
    u_ketp = np.zeros((nk, np_, nv, n))
    if nv:
        u_bra = np.stack([e.vectors for e in bras])
        u_ketp = np.einsum("pmn,kvm->kpvn", ctx.orth, np.stack([e.vectors for e in kets]))

    # spin overlaps per (bra, ket, perm)
    x_bra = np.stack([e.chi for e in bras])
    chi_perm = np.empty((nk, np_, kets[0].chi.size))
    for k, e in enumerate(kets):
        for p, idx in enumerate(ctx.spin.perm_maps):
            chi_perm[k, p] = e.chi[idx]
    sov = np.einsum("bd,kpd->bkp", x_bra, chi_perm)

    total = nb * nk * np_
    idx_b, idx_k, idx_p = np.unravel_index(np.arange(total), (nb, nk, np_))

    s_el = np.empty(total)
    t_el = np.empty(total)
    v_el = np.empty(total)

    mass = ctx.system.mass
    w_pairs = ctx.frame.pair_vectors
    pot = ctx.system.potential
    s0_front = pi ** (1.5 * n)
    kmax = ctx.kmax

    for start in range(0, total, _CHUNK):
        sl = slice(start, min(start + _CHUNK, total))
        ib, ik, ip = idx_b[sl], idx_k[sl], idx_p[sl]
        m = ib.size
        ab = np.ascontiguousarray(a_bra[ib])
        akp = np.ascontiguousarray(a_ketp[ik, ip])
        b_mat = ab + akp
        b_inv = np.ascontiguousarray(np.linalg.inv(b_mat))
        det_b = np.linalg.det(b_mat)
        s0 = s0_front * det_b**-1.5

        # radial moments M_k / (2k+1)!! per (instance, pair)
        binv_w = np.einsum("xnm,pm->xpn", b_inv, w_pairs)
        k_ww = 0.5 * np.einsum("xpn,pn->xp", binv_w, w_pairs)
        c_all = 1.0 / (2.0 * k_ww)
        moments = spec_radial_moments(pot, c_all.ravel(), kmax).reshape(
            m, len(w_pairs), kmax + 1
        )
        mh = (
            4.0 * pi * (c_all[..., None] / pi) ** 1.5 * moments
            / _DOUBLE_FACT[None, None, : kmax + 1]
        )

        if use_kernel and kernels.HAVE_NUMBA:
            ubc = np.ascontiguousarray(u_bra[ib])
            ukc = np.ascontiguousarray(u_ketp[ik, ip])
            out_s = np.empty(m)
            out_t = np.empty(m)
            out_v = np.empty(m)
            kernels.assemble(
                ab, akp, b_inv, s0, ubc, ukc, w_pairs,
                np.ascontiguousarray(mh), 1.0 / (2.0 * mass),
                *ctx.label_arrays, lay.total, lay.rho_index,
                *ctx.polys["overlap"], *ctx.polys["kinetic"], *ctx.polys["potential"],
                out_s, out_t, out_v,
            )
            s_el[sl], t_el[sl], v_el[sl] = out_s, out_t, out_v
        else:
            s_el[sl], t_el[sl], v_el[sl] = _assemble_numpy(
                ctx, lay, ab, akp, b_inv, s0, u_bra[ib], u_ketp[ik, ip],
                w_pairs, mh, mass,
            )

    weight = (ctx.signs[None, None, :] * sov).reshape(nb, nk, np_)
    s_3 = s_el.reshape(nb, nk, np_)
    t_3 = t_el.reshape(nb, nk, np_)
    v_3 = v_el.reshape(nb, nk, np_)
    return Block(
        s=np.einsum("bkp,bkp->bk", weight, s_3),
        t=np.einsum("bkp,bkp->bk", weight, t_3),
        v=np.einsum("bkp,bkp->bk", weight, v_3),
        s_scale=np.einsum("bkp->bk", np.abs(weight * s_3)),
    )


def _assemble_numpy(ctx, lay, ab, akp, b_inv, s0, ub, uk, w_pairs, mh, mass):
    """Reference numpy path (also the fallback when numba is missing)."""
    m = ab.shape[0]
    n = ctx.n_jacobi
    nv = lay.nv
    v_stack = np.zeros((m, n, lay.total))
    v_stack[:, np.arange(n), np.array(lay.e)] = 1.0
    if nv:
        v_stack[:, :, lay.bra] = ub.transpose(0, 2, 1)
        v_stack[:, :, lay.ket] = uk.transpose(0, 2, 1)
        v_stack[:, :, lay.bra_t] = np.einsum("xnm,xvm->xnv", akp, ub)
        v_stack[:, :, lay.ket_t] = np.einsum("xnm,xvm->xnv", ab, uk)
    v_stack[:, :, lay.acol] = ab
    v_stack[:, :, lay.apcol] = akp

    binv_v = np.einsum("xnm,xml->xnl", b_inv, v_stack)
    kap = 0.5 * np.einsum("xnk,xnl->xkl", v_stack, binv_v)
    edot = np.einsum("xnk,xnl->xkl", v_stack, v_stack)
    ones = np.ones((m, 1))

    s_el = wick.poly_eval(ctx.polys["overlap"], kap, edot, ones) * s0
    t_el = wick.poly_eval(ctx.polys["kinetic"], kap, edot, ones) * s0 / (2.0 * mass)

    pot_acc = np.zeros(m)
    kap_ext = np.zeros((m, lay.total + 1, lay.total + 1))
    for p, w in enumerate(w_pairs):
        binv_w = np.einsum("xnm,m->xn", b_inv, w)
        k_ww = 0.5 * (binv_w @ w)
        k_w = 0.5 * np.einsum("xnl,xn->xl", v_stack, binv_w)
        beta = k_w / k_ww[:, None]
        kap_ext[:, : lay.total, : lay.total] = kap - np.einsum("xi,xj->xij", beta, k_w)
        kap_ext[:, lay.rho_index, : lay.total] = beta
        kap_ext[:, : lay.total, lay.rho_index] = beta
        kap_ext[:, lay.rho_index, lay.rho_index] = 1.0
        pot_acc += wick.poly_eval(ctx.polys["potential"], kap_ext, edot, mh[:, p, :])
    return s_el, t_el, pot_acc * s0
