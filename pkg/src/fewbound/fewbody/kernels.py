"""Fused numba kernel for batched matrix-element assembly.

One instance = one (bra element, ket element, permutation) triple.  The kernel
builds the global-vector stack, the covariance tables, and evaluates the
overlap/kinetic/potential Wick polynomials; radial moments arrive precomputed
(they need scipy special functions).
"""

from __future__ import annotations

import numpy as np

try:
    import numba
    from numba import njit, prange

    # single-worker sandbox friendliness: avoids the TBB version warning
    numba.config.THREADING_LAYER = "workqueue"

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

    def njit(*args, **kwargs):  # type: ignore
        def wrap(fn):
            return fn

        return wrap

    prange = range  # type: ignore


@njit(cache=True, inline="always")
def _poly(coeff, kidx, eidx, kpow, kap, edot, mh):
    acc = 0.0
    for t in range(coeff.size):
        v = coeff[t] * mh[kpow[t]]
        for f in range(kidx.shape[1]):
            a = kidx[t, f, 0]
            if a < 0:
                break
            v *= kap[a, kidx[t, f, 1]]
        for f in range(eidx.shape[1]):
            a = eidx[t, f, 0]
            if a < 0:
                break
            v *= edot[a, eidx[t, f, 1]]
        acc += v
    return acc


@njit(cache=True, parallel=True)
def assemble(ab, akp, binv, s0, ub, uk, wp, mh_pairs, inv_two_mass,
             lab_e, lab_bra, lab_ket, lab_brat, lab_kett, lab_acol, lab_apcol,
             ltot, rho,
             c_s, k_s, e_s, p_s,
             c_t, k_t, e_t, p_t,
             c_v, k_v, e_v, p_v,
             out_s, out_t, out_v):  # pragma: no cover - exercised via wrapper
    m = ab.shape[0]
    n = ab.shape[1]
    nv = ub.shape[1]
    npair = wp.shape[0]
    one = np.ones(1)
    for x in prange(m):
        vst = np.zeros((n, ltot))
        for l in range(n):
            vst[l, lab_e[l]] = 1.0
        for v in range(nv):
            for r in range(n):
                vst[r, lab_bra[v]] = ub[x, v, r]
                vst[r, lab_ket[v]] = uk[x, v, r]
                sb = 0.0
                sk = 0.0
                for c in range(n):
                    sb += akp[x, r, c] * ub[x, v, c]
                    sk += ab[x, r, c] * uk[x, v, c]
                vst[r, lab_brat[v]] = sb
                vst[r, lab_kett[v]] = sk
        for l in range(n):
            for r in range(n):
                vst[r, lab_acol[l]] = ab[x, r, l]
                vst[r, lab_apcol[l]] = akp[x, r, l]

        bv = np.zeros((n, ltot))
        for r in range(n):
            for k in range(ltot):
                s = 0.0
                for c in range(n):
                    s += binv[x, r, c] * vst[c, k]
                bv[r, k] = s
        kap = np.zeros((ltot, ltot))
        edot = np.zeros((ltot, ltot))
        for i in range(ltot):
            for j in range(ltot):
                a = 0.0
                e = 0.0
                for r in range(n):
                    a += vst[r, i] * bv[r, j]
                    e += vst[r, i] * vst[r, j]
                kap[i, j] = 0.5 * a
                edot[i, j] = e

        out_s[x] = _poly(c_s, k_s, e_s, p_s, kap, edot, one) * s0[x]
        out_t[x] = _poly(c_t, k_t, e_t, p_t, kap, edot, one) * s0[x] * inv_two_mass

        kext = np.zeros((ltot + 1, ltot + 1))
        pot = 0.0
        for p in range(npair):
            bw = np.zeros(n)
            for r in range(n):
                s = 0.0
                for c in range(n):
                    s += binv[x, r, c] * wp[p, c]
                bw[r] = s
            kww = 0.0
            for r in range(n):
                kww += 0.5 * wp[p, r] * bw[r]
            for i in range(ltot):
                kwi = 0.0
                for r in range(n):
                    kwi += 0.5 * vst[r, i] * bw[r]
                kext[rho, i] = kwi / kww
                kext[i, rho] = kext[rho, i]
            for i in range(ltot):
                bi = kext[i, rho]
                for j in range(ltot):
                    kext[i, j] = kap[i, j] - bi * kext[j, rho] * kww
            kext[rho, rho] = 1.0
            pot += _poly(c_v, k_v, e_v, p_v, kext, edot, mh_pairs[x, p])
        out_v[x] = pot * s0[x]
