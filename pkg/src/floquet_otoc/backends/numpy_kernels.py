"""Pure-numpy fallback kernels, signature-compatible with the numba set.

Same contracts as :mod:`floquet_otoc.backends.numba_kernels`; implemented with
vectorized selections instead of fused loops, so results agree to rounding
while throughput is lower.
"""

from __future__ import annotations

import numpy as np

_ROW_CHUNK = 512


def _pair_selectors(mask: int, dim: int) -> tuple[np.ndarray, np.ndarray]:
    """Index pairs (i, i ^ mask) with each pair listed once."""
    hb = 1 << (int(mask).bit_length() - 1)
    idx = np.arange(dim, dtype=np.int64)
    sel0 = idx[(idx & hb) == 0]
    return sel0, sel0 ^ mask


def scale_two_sided(wr, wi, rr, ri, cr, ci):
    """W[r, c] *= (rr + i ri)[r] * (cr + i ci)[c]."""
    dim = wr.shape[0]
    for r0 in range(0, dim, _ROW_CHUNK):
        sl = slice(r0, min(dim, r0 + _ROW_CHUNK))
        fr = rr[sl, None] * cr[None, :] - ri[sl, None] * ci[None, :]
        fi = rr[sl, None] * ci[None, :] + ri[sl, None] * cr[None, :]
        a = wr[sl]
        b = wi[sl]
        new_r = a * fr - b * fi
        new_i = a * fi + b * fr
        wr[sl] = new_r
        wi[sl] = new_i


def scale_rows(wr, wi, dr, di):
    """W[r, :] *= (dr + i di)[r]."""
    new_r = wr * dr[:, None] - wi * di[:, None]
    new_i = wr * di[:, None] + wi * dr[:, None]
    wr[:] = new_r
    wi[:] = new_i


def rotate_cols(wr, wi, masks, coss, sins):
    """W <- W @ prod_k R(masks[k], angles[k])."""
    dim = wr.shape[0]
    for k in range(len(masks)):
        sel0, sel1 = _pair_selectors(int(masks[k]), dim)
        c = coss[k]
        s = sins[k]
        v0r = wr[:, sel0].copy()
        v0i = wi[:, sel0].copy()
        v1r = wr[:, sel1].copy()
        v1i = wi[:, sel1].copy()
        wr[:, sel0] = c * v0r + s * v1i
        wi[:, sel0] = c * v0i - s * v1r
        wr[:, sel1] = c * v1r + s * v0i
        wi[:, sel1] = c * v1i - s * v0r


def rotate_rows_batch(wr, wi, lo_bit, span, masks, coss, sins):
    """W <- prod_k R(masks[k], angles[k]) @ W; batching hints are ignored."""
    dim = wr.shape[0]
    for k in range(len(masks)):
        sel0, sel1 = _pair_selectors(int(masks[k]), dim)
        c = coss[k]
        s = sins[k]
        v0r = wr[sel0].copy()
        v0i = wi[sel0].copy()
        v1r = wr[sel1].copy()
        v1i = wi[sel1].copy()
        wr[sel0] = c * v0r + s * v1i
        wi[sel0] = c * v0i - s * v1r
        wr[sel1] = c * v1r + s * v0i
        wi[sel1] = c * v1i - s * v0r


def mul_xflip_sum(wr, wi, masks, coefs, br, bi):
    """B = sum_k coefs[k] * W[:, c ^ masks[k]]; returns sum |B|^2."""
    dim = wr.shape[0]
    idx = np.arange(dim, dtype=np.int64)
    br[:] = 0.0
    bi[:] = 0.0
    for k in range(len(masks)):
        cols = idx ^ int(masks[k])
        br += coefs[k] * wr[:, cols]
        bi += coefs[k] * wi[:, cols]
    fr = br.ravel()
    fi = bi.ravel()
    return float(fr @ fr + fi @ fi)


def mul_zdiag(wr, wi, d, br, bi):
    """B[:, c] = W[:, c] * d[c] for real diagonal d; returns sum |B|^2."""
    np.multiply(wr, d[None, :], out=br)
    np.multiply(wi, d[None, :], out=bi)
    fr = br.ravel()
    fi = bi.ravel()
    return float(fr @ fr + fi @ fi)


def trace_prod_sym(br, bi):
    """Re sum_{r,c} B[r,c] * B[c,r]."""
    return float((br * br.T).sum() - (bi * bi.T).sum())


def otoc_sums_strict(br, bi):
    """(sum |B|^2, Re sum B[r,c] B[c,r]) with matched accumulation order.

    Both sums reduce same-shaped elementwise products through numpy's
    pairwise tree, so equal addends give bit-identical results and
    C2 - C4 vanishes exactly at kick zero for commuting W0, V0.
    """
    t2 = br * br + bi * bi
    t4 = br * br.T - bi * bi.T
    return float(np.sum(t2)), float(np.sum(t4))


def sum_sq(wr, wi):
    """Frobenius norm squared."""
    fr = wr.ravel()
    fi = wi.ravel()
    return float(fr @ fr + fi @ fi)


def max_colnorm_dev(ur, ui):
    """max_c | sum_r |U[r,c]|^2 - 1 |."""
    norms = (ur * ur + ui * ui).sum(axis=0)
    return float(np.abs(norms - 1.0).max())
