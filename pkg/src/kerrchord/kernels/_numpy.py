"""Pure-numpy versions of the hot kernels.

Each function here has a twin with the same signature in ``_numba.py``.
The numpy forms vectorise over sample points and loop in Python over basis
indices, so they are slower for small batches but have no compile step.
"""
import numpy as np

_PI_QUARTER = np.pi ** -0.25


def hermite_basis(n, x):
    x = np.asarray(x, dtype=float)
    out = np.empty((n,) + x.shape)
    out[0] = _PI_QUARTER * np.exp(-0.5 * x * x)
    if n > 1:
        out[1] = np.sqrt(2.0) * x * out[0]
    for k in range(1, n - 1):
        out[k + 1] = np.sqrt(2.0 / (k + 1)) * x * out[k] - np.sqrt(k / (k + 1)) * out[k - 1]
    return out


def hermite_series(coeffs, x):
    coeffs = np.asarray(coeffs, dtype=complex)
    x = np.asarray(x, dtype=float)
    n = coeffs.shape[0]
    prev = np.zeros_like(x)
    cur = _PI_QUARTER * np.exp(-0.5 * x * x)
    acc = coeffs[0] * cur
    for k in range(n - 1):
        nxt = np.sqrt(2.0 / (k + 1)) * x * cur - np.sqrt(k / (k + 1)) * prev
        acc = acc + coeffs[k + 1] * nxt
        prev, cur = cur, nxt
    return acc


def displacement_expectation(coeffs, gamma):
    coeffs = np.asarray(coeffs, dtype=complex)
    gamma = np.asarray(gamma, dtype=complex)
    n = coeffs.shape[0]
    x = (gamma * np.conj(gamma)).real
    total = np.zeros(gamma.shape, dtype=complex)
    pre_lo = np.exp(-0.5 * x).astype(complex)
    pre_up = pre_lo.copy()
    cc = np.conj(coeffs)
    for k in range(n):
        if k > 0:
            pre_lo = pre_lo * gamma / np.sqrt(k)
            pre_up = pre_up * (-np.conj(gamma)) / np.sqrt(k)
        # r holds the normalised Laguerre values L_j^(k)(x) / sqrt(C(j+k, j))
        r_prev = np.zeros_like(x)
        r = np.ones_like(x)
        s_lo = np.zeros(gamma.shape, dtype=complex)
        s_up = np.zeros(gamma.shape, dtype=complex)
        for j in range(n - k):
            s_lo = s_lo + (cc[j + k] * coeffs[j]) * r
            if k > 0:
                s_up = s_up + (cc[j] * coeffs[j + k]) * r
            r_next = ((2 * j + 1 + k - x) * r - np.sqrt(j * (j + k)) * r_prev) / np.sqrt((j + 1) * (j + 1 + k))
            r_prev, r = r, r_next
        total = total + pre_lo * s_lo
        if k > 0:
            total = total + pre_up * s_up
    return total


_CORNERS = np.array([[0, 0], [1, 0], [1, 1], [0, 1]])
# cell edge e -> (corner, corner)
_EDGE_CORNERS = np.array([[0, 1], [1, 2], [3, 2], [0, 3]])


def _edge_ids(i, j, e, nb):
    # global ids: even = edge along axis a from (i, j); odd = edge along axis b from (i, j)
    ii = np.where(e == 1, i + 1, i)
    jj = np.where(e == 2, j + 1, j)
    kind = np.where((e == 0) | (e == 2), 0, 1)
    return 2 * (ii * nb + jj) + kind


def marching_segments(values):
    v = np.asarray(values, dtype=float)
    na, nb = v.shape
    c = np.stack([v[:-1, :-1], v[1:, :-1], v[1:, 1:], v[:-1, 1:]], axis=-1)
    s = c > 0
    crosses = np.stack([s[..., a] != s[..., b] for a, b in _EDGE_CORNERS], axis=-1)
    ncross = crosses.sum(axis=-1)
    ii, jj = np.meshgrid(np.arange(na - 1), np.arange(nb - 1), indexing="ij")

    pairs = []
    # simple cells: exactly two crossing edges
    sel = ncross == 2
    idx = np.argsort(~crosses[sel], axis=-1, kind="stable")[:, :2]
    pairs.append((ii[sel], jj[sel], idx[:, 0], idx[:, 1], c[sel]))
    # saddles: resolve with the centre sample (mean of the corners)
    sad = ncross == 4
    if np.any(sad):
        cs = c[sad]
        centre_pos = cs.mean(axis=-1) > 0
        joined02 = centre_pos == (cs[:, 0] > 0)
        e_a = np.where(joined02, 0, 0)
        e_b = np.where(joined02, 1, 3)
        e_c = np.where(joined02, 2, 1)
        e_d = np.where(joined02, 3, 2)
        pairs.append((ii[sad], jj[sad], e_a, e_b, cs))
        pairs.append((ii[sad], jj[sad], e_c, e_d, cs))

    segs, cells, eids = [], [], []
    for ci, cj, e0, e1, cv in pairs:
        p0 = _crossing(ci, cj, e0, cv)
        p1 = _crossing(ci, cj, e1, cv)
        segs.append(np.concatenate([p0, p1], axis=1))
        cells.append(np.stack([ci, cj], axis=1))
        eids.append(np.stack([_edge_ids(ci, cj, e0, nb), _edge_ids(ci, cj, e1, nb)], axis=1))
    segs = np.concatenate(segs) if segs else np.empty((0, 4))
    cells = np.concatenate(cells) if cells else np.empty((0, 2), dtype=np.int64)
    eids = np.concatenate(eids) if eids else np.empty((0, 2), dtype=np.int64)
    order = np.lexsort((eids[:, 1], eids[:, 0], cells[:, 1], cells[:, 0]))
    return segs[order], cells[order].astype(np.int64), eids[order].astype(np.int64)


def _crossing(ci, cj, e, cv):
    ka = _EDGE_CORNERS[e, 0]
    kb = _EDGE_CORNERS[e, 1]
    rows = np.arange(len(e))
    va = cv[rows, ka]
    vb = cv[rows, kb]
    frac = va / (va - vb)
    pa = _CORNERS[ka] + frac[:, None] * (_CORNERS[kb] - _CORNERS[ka])
    return np.stack([ci + pa[:, 0], cj + pa[:, 1]], axis=1)


def segment_intersections(seg_a, cell_a, seg_b, cell_b, shape):
    """Intersections of every a-segment with b-segments in the 3x3 cell neighbourhood."""
    na, nb = shape
    table = np.full((na + 2, nb + 2, 2), -1, dtype=np.int64)
    fill = np.zeros((na + 2, nb + 2), dtype=np.int64)
    for k in range(len(seg_b)):
        i, j = cell_b[k, 0] + 1, cell_b[k, 1] + 1
        if fill[i, j] < 2:
            table[i, j, fill[i, j]] = k
            fill[i, j] += 1
    if len(seg_a) == 0:
        return np.empty((0, 2)), np.empty((0, 2), dtype=np.int64)
    di, dj = np.meshgrid([-1, 0, 1], [-1, 0, 1], indexing="ij")
    ci = cell_a[:, 0, None] + 1 + di.ravel()[None, :]
    cj = cell_a[:, 1, None] + 1 + dj.ravel()[None, :]
    cand = table[ci, cj].reshape(len(seg_a), -1)
    ia = np.repeat(np.arange(len(seg_a)), cand.shape[1])
    ib = cand.ravel()
    keep = ib >= 0
    ia, ib = ia[keep], ib[keep]
    pts, ok = _intersect(seg_a[ia], seg_b[ib])
    return pts[ok], np.stack([ia[ok], ib[ok]], axis=1)


def _intersect(s, t):
    p = s[:, :2]
    r = s[:, 2:] - p
    q = t[:, :2]
    u = t[:, 2:] - q
    den = r[:, 0] * u[:, 1] - r[:, 1] * u[:, 0]
    qp = q - p
    with np.errstate(divide="ignore", invalid="ignore"):
        ta = (qp[:, 0] * u[:, 1] - qp[:, 1] * u[:, 0]) / den
        tb = (qp[:, 0] * r[:, 1] - qp[:, 1] * r[:, 0]) / den
    eps = 1e-12
    ok = (den != 0) & (ta >= -eps) & (ta <= 1 + eps) & (tb >= -eps) & (tb <= 1 + eps)
    ta = np.where(ok, ta, 0.0)
    return p + ta[:, None] * r, ok
