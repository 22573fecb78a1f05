"""Numba-compiled versions of the hot kernels (same signatures as ``_numpy``)."""
import numpy as np
from numba import njit

_PI_QUARTER = np.pi ** -0.25


@njit(cache=True)
def _recurrence_coeffs(n):
    up = np.empty(max(n, 1))
    down = np.empty(max(n, 1))
    for k in range(n):
        up[k] = np.sqrt(2.0 / (k + 1))
        down[k] = np.sqrt(k / (k + 1))
    return up, down


@njit(cache=True)
def _hermite_basis_flat(n, x):
    m = x.shape[0]
    out = np.empty((n, m))
    up, down = _recurrence_coeffs(n)
    for i in range(m):
        xi = x[i]
        h0 = _PI_QUARTER * np.exp(-0.5 * xi * xi)
        out[0, i] = h0
        if n > 1:
            h1 = np.sqrt(2.0) * xi * h0
            out[1, i] = h1
            for k in range(1, n - 1):
                h2 = up[k] * xi * h1 - down[k] * h0
                out[k + 1, i] = h2
                h0 = h1
                h1 = h2
    return out


def hermite_basis(n, x):
    x = np.asarray(x, dtype=float)
    flat = _hermite_basis_flat(int(n), np.ascontiguousarray(x.ravel()))
    return flat.reshape((n,) + x.shape)


@njit(cache=True)
def _hermite_series_flat(coeffs, x):
    n = coeffs.shape[0]
    m = x.shape[0]
    out = np.empty(m, dtype=np.complex128)
    up, down = _recurrence_coeffs(n)
    cre = coeffs.real.copy()
    cim = coeffs.imag.copy()
    for i in range(m):
        xi = x[i]
        prev = 0.0
        cur = _PI_QUARTER * np.exp(-0.5 * xi * xi)
        acc_re = cre[0] * cur
        acc_im = cim[0] * cur
        for k in range(n - 1):
            nxt = up[k] * xi * cur - down[k] * prev
            acc_re += cre[k + 1] * nxt
            acc_im += cim[k + 1] * nxt
            prev = cur
            cur = nxt
        out[i] = acc_re + 1j * acc_im
    return out


def hermite_series(coeffs, x):
    x = np.asarray(x, dtype=float)
    c = np.ascontiguousarray(np.asarray(coeffs, dtype=np.complex128))
    return _hermite_series_flat(c, np.ascontiguousarray(x.ravel())).reshape(x.shape)


@njit(cache=True)
def _displacement_one(coeffs, cc, g):
    n = coeffs.shape[0]
    x = (g.real * g.real + g.imag * g.imag)
    pre_lo = np.exp(-0.5 * x) + 0j
    pre_up = pre_lo
    gm = -np.conj(g)
    total = 0j
    for k in range(n):
        if k > 0:
            sk = np.sqrt(k)
            pre_lo = pre_lo * g / sk
            pre_up = pre_up * gm / sk
        r_prev = 0.0
        r = 1.0
        s_lo = 0j
        s_up = 0j
        for j in range(n - k):
            s_lo += (cc[j + k] * coeffs[j]) * r
            if k > 0:
                s_up += (cc[j] * coeffs[j + k]) * r
            r_next = ((2 * j + 1 + k - x) * r - np.sqrt(j * (j + k)) * r_prev) / np.sqrt((j + 1) * (j + 1 + k))
            r_prev = r
            r = r_next
        total += pre_lo * s_lo
        if k > 0:
            total += pre_up * s_up
    return total


@njit(cache=True)
def _displacement_flat(coeffs, gamma):
    cc = np.conj(coeffs)
    out = np.empty(gamma.shape[0], dtype=np.complex128)
    for i in range(gamma.shape[0]):
        out[i] = _displacement_one(coeffs, cc, gamma[i])
    return out


def displacement_expectation(coeffs, gamma):
    gamma = np.asarray(gamma, dtype=np.complex128)
    c = np.ascontiguousarray(np.asarray(coeffs, dtype=np.complex128))
    return _displacement_flat(c, np.ascontiguousarray(gamma.ravel())).reshape(gamma.shape)


# corner offsets (da, db) and the corner pair of each cell edge
_CA = np.array([0, 1, 1, 0])
_CB = np.array([0, 0, 1, 1])
_EA = np.array([0, 1, 3, 0])
_EB = np.array([1, 2, 2, 3])


@njit(cache=True)
def _edge_id(i, j, e, nb):
    ii = i + 1 if e == 1 else i
    jj = j + 1 if e == 2 else j
    kind = 0 if (e == 0 or e == 2) else 1
    return 2 * (ii * nb + jj) + kind


@njit(cache=True)
def _marching(v, ca, cb, ea, eb):
    na, nb = v.shape
    cap = 2 * (na - 1) * (nb - 1)
    segs = np.empty((cap, 4))
    cells = np.empty((cap, 2), dtype=np.int64)
    eids = np.empty((cap, 2), dtype=np.int64)
    cv = np.empty(4)
    cr = np.empty(4, dtype=np.bool_)
    pick = np.empty(4, dtype=np.int64)
    count = 0
    for i in range(na - 1):
        for j in range(nb - 1):
            cv[0] = v[i, j]
            cv[1] = v[i + 1, j]
            cv[2] = v[i + 1, j + 1]
            cv[3] = v[i, j + 1]
            ncross = 0
            for e in range(4):
                cr[e] = (cv[ea[e]] > 0) != (cv[eb[e]] > 0)
                if cr[e]:
                    pick[ncross] = e
                    ncross += 1
            if ncross == 0:
                continue
            npair = 1
            if ncross == 4:
                npair = 2
                centre_pos = (cv[0] + cv[1] + cv[2] + cv[3]) * 0.25 > 0
                if centre_pos == (cv[0] > 0):
                    pick[0] = 0
                    pick[1] = 1
                    pick[2] = 2
                    pick[3] = 3
                else:
                    pick[0] = 0
                    pick[1] = 3
                    pick[2] = 1
                    pick[3] = 2
            for s in range(npair):
                for end in range(2):
                    e = pick[2 * s + end]
                    va = cv[ea[e]]
                    vb = cv[eb[e]]
                    f = va / (va - vb)
                    pa = ca[ea[e]] + f * (ca[eb[e]] - ca[ea[e]])
                    pb = cb[ea[e]] + f * (cb[eb[e]] - cb[ea[e]])
                    segs[count, 2 * end] = i + pa
                    segs[count, 2 * end + 1] = j + pb
                    eids[count, end] = _edge_id(i, j, e, nb)
                cells[count, 0] = i
                cells[count, 1] = j
                count += 1
    return segs[:count], cells[:count], eids[:count]


def marching_segments(values):
    v = np.ascontiguousarray(np.asarray(values, dtype=float))
    segs, cells, eids = _marching(v, _CA, _CB, _EA, _EB)
    order = np.lexsort((eids[:, 1], eids[:, 0], cells[:, 1], cells[:, 0]))
    return segs[order], cells[order], eids[order]


@njit(cache=True)
def _intersections(seg_a, cell_a, seg_b, cell_b, na, nb):
    table = np.full((na + 2, nb + 2, 2), -1, dtype=np.int64)
    fill = np.zeros((na + 2, nb + 2), dtype=np.int64)
    for k in range(seg_b.shape[0]):
        i = cell_b[k, 0] + 1
        j = cell_b[k, 1] + 1
        if fill[i, j] < 2:
            table[i, j, fill[i, j]] = k
            fill[i, j] += 1
    cap = seg_a.shape[0] * 18
    pts = np.empty((cap, 2))
    pairs = np.empty((cap, 2), dtype=np.int64)
    count = 0
    eps = 1e-12
    for ia in range(seg_a.shape[0]):
        px = seg_a[ia, 0]
        py = seg_a[ia, 1]
        rx = seg_a[ia, 2] - px
        ry = seg_a[ia, 3] - py
        for di in range(-1, 2):
            for dj in range(-1, 2):
                for slot in range(2):
                    ib = table[cell_a[ia, 0] + 1 + di, cell_a[ia, 1] + 1 + dj, slot]
                    if ib < 0:
                        continue
                    qx = seg_b[ib, 0]
                    qy = seg_b[ib, 1]
                    ux = seg_b[ib, 2] - qx
                    uy = seg_b[ib, 3] - qy
                    den = rx * uy - ry * ux
                    if den == 0:
                        continue
                    wx = qx - px
                    wy = qy - py
                    ta = (wx * uy - wy * ux) / den
                    tb = (wx * ry - wy * rx) / den
                    if ta >= -eps and ta <= 1 + eps and tb >= -eps and tb <= 1 + eps:
                        pts[count, 0] = px + ta * rx
                        pts[count, 1] = py + ta * ry
                        pairs[count, 0] = ia
                        pairs[count, 1] = ib
                        count += 1
    return pts[:count], pairs[:count]


def segment_intersections(seg_a, cell_a, seg_b, cell_b, shape):
    na, nb = shape
    pts, pairs = _intersections(np.ascontiguousarray(seg_a, dtype=float),
                                np.ascontiguousarray(cell_a, dtype=np.int64),
                                np.ascontiguousarray(seg_b, dtype=float),
                                np.ascontiguousarray(cell_b, dtype=np.int64), na, nb)
    return pts, pairs
