"""Numba kernels for split re/im dense-operator updates.

All kernels operate on C-contiguous float64 matrix pairs (wr, wi) holding the
real and imaginary parts of a 2^N x 2^N operator. Rotations implement
v' = cos(a) v - i sin(a) v_partner on paired indices (i, i ^ mask); callers
encode daggering by negating the sine argument.

Column rotations are fused per row so each 2-row working set stays in L1/L2;
row rotations are batched by bit groups so row groups stream through L2 once
per batch. Low-bit column rotations get unrolled block bodies because their
contiguous runs are too short for the loop vectorizer.
"""

from __future__ import annotations

import numpy as np
from numba import njit

_JIT = dict(cache=True, fastmath=True, nogil=True)


@njit(**_JIT)
def scale_two_sided(wr, wi, rr, ri, cr, ci):
    """W[r, c] *= (rr + i ri)[r] * (cr + i ci)[c]."""
    dim = wr.shape[0]
    for r in range(dim):
        ar = wr[r]
        ai = wi[r]
        xr = rr[r]
        xi = ri[r]
        for c in range(dim):
            fr = xr * cr[c] - xi * ci[c]
            fi = xr * ci[c] + xi * cr[c]
            a = ar[c]
            b = ai[c]
            ar[c] = a * fr - b * fi
            ai[c] = a * fi + b * fr


@njit(**_JIT)
def scale_rows(wr, wi, dr, di):
    """W[r, :] *= (dr + i di)[r]."""
    dim = wr.shape[0]
    for r in range(dim):
        ar = wr[r]
        ai = wi[r]
        xr = dr[r]
        xi = di[r]
        for c in range(wr.shape[1]):
            a = ar[c]
            b = ai[c]
            ar[c] = a * xr - b * xi
            ai[c] = a * xi + b * xr


@njit(**_JIT)
def _rot1_row(ar, ai, sp, c, s):
    # The pair update splits into two independent Givens rotations on the
    # slot pairs (re_lo, im_hi) and (im_lo, re_hi); each loop then streams
    # one contiguous run of ar and one of ai, which vectorizes cleanly.
    n = ar.shape[0]
    if sp == 1:
        for q in range(0, n, 2):
            a0 = ar[q]
            i0 = ai[q]
            a1 = ar[q + 1]
            i1 = ai[q + 1]
            ar[q] = c * a0 + s * i1
            ai[q] = c * i0 - s * a1
            ar[q + 1] = c * a1 + s * i0
            ai[q + 1] = c * i1 - s * a0
    elif sp == 2:
        for q in range(0, n, 4):
            for lo in range(2):
                a0 = ar[q + lo]
                i0 = ai[q + lo]
                a1 = ar[q + lo + 2]
                i1 = ai[q + lo + 2]
                ar[q + lo] = c * a0 + s * i1
                ai[q + lo] = c * i0 - s * a1
                ar[q + lo + 2] = c * a1 + s * i0
                ai[q + lo + 2] = c * i1 - s * a0
    else:
        for b0 in range(0, n, 2 * sp):
            hi = b0 + sp
            for j in range(b0, hi):
                x = ar[j]
                y = ai[j + sp]
                ar[j] = c * x + s * y
                ai[j + sp] = c * y - s * x
            for j in range(b0, hi):
                x = ai[j]
                y = ar[j + sp]
                ai[j] = c * x - s * y
                ar[j + sp] = c * y + s * x


@njit(**_JIT)
def _rot2_row(ar, ai, sa, sb, c, s):
    n = ar.shape[0]
    if sb >= 8:
        step = 2 * sa
        for b0 in range(0, n, step):
            for mid in range(b0, b0 + sa, 2 * sb):
                d = sa + sb
                for j in range(mid, mid + sb):
                    x = ar[j]
                    y = ai[j + d]
                    ar[j] = c * x + s * y
                    ai[j + d] = c * y - s * x
                for j in range(mid, mid + sb):
                    x = ai[j]
                    y = ar[j + d]
                    ai[j] = c * x - s * y
                    ar[j + d] = c * y + s * x
                d = sa - sb
                for j in range(mid + sb, mid + 2 * sb):
                    x = ar[j]
                    y = ai[j + d]
                    ar[j] = c * x + s * y
                    ai[j + d] = c * y - s * x
                for j in range(mid + sb, mid + 2 * sb):
                    x = ai[j]
                    y = ar[j + d]
                    ai[j] = c * x - s * y
                    ar[j + d] = c * y + s * x
    else:
        # short runs: unrolled whole-block pair pattern (i, i ^ (sa|sb))
        m = sa + sb
        blk = 2 * sa
        for q in range(0, n, blk):
            for u in range(sa):
                p0 = q + u
                p1 = p0 ^ m
                if p1 > p0:
                    a0 = ar[p0]
                    i0 = ai[p0]
                    a1 = ar[p1]
                    i1 = ai[p1]
                    ar[p0] = c * a0 + s * i1
                    ai[p0] = c * i0 - s * a1
                    ar[p1] = c * a1 + s * i0
                    ai[p1] = c * i1 - s * a0
                p0 = q + sa + u
                p1 = p0 ^ m
                if p1 > p0:
                    a0 = ar[p0]
                    i0 = ai[p0]
                    a1 = ar[p1]
                    i1 = ai[p1]
                    ar[p0] = c * a0 + s * i1
                    ai[p0] = c * i0 - s * a1
                    ar[p1] = c * a1 + s * i0
                    ai[p1] = c * i1 - s * a0


@njit(**_JIT)
def rotate_cols(wr, wi, masks, coss, sins):
    """W <- W @ prod_k R(masks[k], angles[k]), fused per row."""
    dim = wr.shape[0]
    nrot = masks.shape[0]
    for r in range(dim):
        ar = wr[r]
        ai = wi[r]
        for k in range(nrot):
            m = masks[k]
            mlow = m & (-m)
            mhigh = m ^ mlow
            if mhigh == 0:
                _rot1_row(ar, ai, mlow, coss[k], sins[k])
            else:
                _rot2_row(ar, ai, mhigh, mlow, coss[k], sins[k])


@njit(**_JIT)
def rotate_rows_batch(wr, wi, lo_bit, span, masks, coss, sins):
    """W <- prod_k R(masks[k], angles[k]) @ W for masks within the bit group.

    Row groups of 2^span rows (all other bits fixed) are processed together
    so every rotation of the batch reuses the loaded rows.
    """
    dim = wr.shape[0]
    ncol = wr.shape[1]
    nrot = masks.shape[0]
    ng = 1 << span
    n_out = dim >> (lo_bit + span)
    n_in = 1 << lo_bit
    for out in range(n_out):
        for inn in range(n_in):
            base = (out << (lo_bit + span)) + inn
            for k in range(nrot):
                mg = masks[k] >> lo_bit
                hb = mg
                while hb & (hb - 1):
                    hb &= hb - 1
                c = coss[k]
                s = sins[k]
                for g in range(ng):
                    if g & hb == 0:
                        r0 = base + (g << lo_bit)
                        r1 = base + ((g ^ mg) << lo_bit)
                        ar0 = wr[r0]
                        ai0 = wi[r0]
                        ar1 = wr[r1]
                        ai1 = wi[r1]
                        for j in range(ncol):
                            x = ar0[j]
                            y = ai1[j]
                            ar0[j] = c * x + s * y
                            ai1[j] = c * y - s * x
                        for j in range(ncol):
                            x = ai0[j]
                            y = ar1[j]
                            ai0[j] = c * x - s * y
                            ar1[j] = c * y + s * x


@njit(**_JIT)
def mul_xflip_sum(wr, wi, masks, coefs, br, bi):
    """B = sum_k coefs[k] * W[:, c ^ masks[k]]; returns sum |B|^2.

    Right multiplication by a real combination of X-string permutations.
    """
    dim = wr.shape[0]
    nk = masks.shape[0]
    acc = 0.0
    for r in range(dim):
        ar = wr[r]
        ai = wi[r]
        tr = br[r]
        ti = bi[r]
        for c in range(dim):
            tr[c] = 0.0
            ti[c] = 0.0
        for k in range(nk):
            m = masks[k]
            w = coefs[k]
            blk = m & (-m)
            for q in range(0, dim, blk):
                src = q ^ m
                for lo in range(blk):
                    tr[q + lo] += w * ar[src + lo]
                    ti[q + lo] += w * ai[src + lo]
        for c in range(dim):
            acc += tr[c] * tr[c] + ti[c] * ti[c]
    return acc


@njit(**_JIT)
def mul_zdiag(wr, wi, d, br, bi):
    """B[:, c] = W[:, c] * d[c] for real diagonal d; returns sum |B|^2."""
    dim = wr.shape[0]
    acc = 0.0
    for r in range(dim):
        ar = wr[r]
        ai = wi[r]
        tr = br[r]
        ti = bi[r]
        for c in range(dim):
            x = ar[c] * d[c]
            y = ai[c] * d[c]
            tr[c] = x
            ti[c] = y
            acc += x * x + y * y
    return acc


@njit(**_JIT)
def trace_prod_sym(br, bi):
    """Re sum_{r,c} B[r,c] * B[c,r], via 64x64 tiles with local transposes."""
    dim = br.shape[0]
    T = 64
    if dim < T:
        acc = 0.0
        for r in range(dim):
            for c in range(dim):
                acc += br[r, c] * br[c, r] - bi[r, c] * bi[c, r]
        return acc
    bufr = np.empty((T, T), dtype=np.float64)
    bufi = np.empty((T, T), dtype=np.float64)
    acc = 0.0
    for i0 in range(0, dim, T):
        for j0 in range(0, dim, T):
            for jj in range(T):
                row_r = br[j0 + jj]
                row_i = bi[j0 + jj]
                for ii in range(T):
                    bufr[ii, jj] = row_r[i0 + ii]
                    bufi[ii, jj] = row_i[i0 + ii]
            for ii in range(T):
                row_r = br[i0 + ii]
                row_i = bi[i0 + ii]
                tr = bufr[ii]
                ti = bufi[ii]
                for jj in range(T):
                    acc += row_r[j0 + jj] * tr[jj] - row_i[j0 + jj] * ti[jj]
    return acc


@njit(cache=True, nogil=True)
def otoc_sums_strict(br, bi):
    """(sum |B|^2, Re sum B[r,c] B[c,r]) with matched accumulation order.

    No fastmath here: both sums must see identical, unreassociated addend
    sequences. For B = W0 V0 with commuting Hermitian factors the addends
    are equal position by position, so the two results are bit-identical
    and C2 - C4 vanishes exactly at kick zero.
    """
    dim = br.shape[0]
    acc2 = 0.0
    acc4 = 0.0
    for r in range(dim):
        ar = br[r]
        ai = bi[r]
        for c in range(dim):
            x = ar[c]
            y = ai[c]
            acc2 += x * x + y * y
            acc4 += x * br[c, r] - y * bi[c, r]
    return acc2, acc4


@njit(**_JIT)
def sum_sq(wr, wi):
    """Frobenius norm squared."""
    dim = wr.shape[0]
    acc = 0.0
    for r in range(dim):
        ar = wr[r]
        ai = wi[r]
        for c in range(wr.shape[1]):
            acc += ar[c] * ar[c] + ai[c] * ai[c]
    return acc


@njit(**_JIT)
def max_colnorm_dev(ur, ui):
    """max_c | sum_r |U[r,c]|^2 - 1 |, a cheap unitarity drift witness."""
    dim = ur.shape[0]
    acc = np.zeros(dim, dtype=np.float64)
    for r in range(dim):
        ar = ur[r]
        ai = ui[r]
        for c in range(dim):
            acc[c] += ar[c] * ar[c] + ai[c] * ai[c]
    dev = 0.0
    for c in range(dim):
        d = abs(acc[c] - 1.0)
        if d > dev:
            dev = d
    return dev
