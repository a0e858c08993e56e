"""Numpy implementations of the three hot kernels.

The compiled module gfo._kernels exports the same three callables with the
same contracts; gfo._backend picks whichever is available at import time.

jacobi_eigvals(a)                 -> (diag, ok)
facet_scan(pts, side_tol)         -> (min_dist, facet_count)
collocation_pass(theta, sizes, t, cost, A, b, y0, want_grad)
                                  -> (loss, grad or None)

All float inputs are float64 arrays; callers own validation.
"""

from itertools import combinations

import numpy as np

JACOBI_MAX_SWEEPS = 100
# relative threshold; see sym_eigvals design note in linalg.py
JACOBI_OFF_TOL = 1e-12


def jacobi_eigvals(a):
    """Cyclic Jacobi sweeps. Returns (unsorted diagonal, converged flag)."""
    A = np.array(a, dtype=float)
    n = A.shape[0]
    if n == 1:
        return A.diagonal().copy(), True
    thresh = JACOBI_OFF_TOL * max(1.0, float(np.sqrt((A * A).sum())))
    idx = np.arange(n)
    for _ in range(JACOBI_MAX_SWEEPS):
        off = float(np.sqrt(2.0 * (np.triu(A, 1) ** 2).sum()))
        if off < thresh:
            return A.diagonal().copy(), True
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                theta = 0.5 * (A[q, q] - A[p, p]) / apq
                if theta >= 0.0:
                    t = 1.0 / (theta + np.sqrt(theta * theta + 1.0))
                else:
                    t = 1.0 / (theta - np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                app = A[p, p]
                aqq = A[q, q]
                rest = (idx != p) & (idx != q)
                arp = A[rest, p].copy()
                arq = A[rest, q].copy()
                A[rest, p] = c * arp - s * arq
                A[rest, q] = s * arp + c * arq
                A[p, rest] = A[rest, p]
                A[q, rest] = A[rest, q]
                A[p, p] = app - t * apq
                A[q, q] = aqq + t * apq
                A[p, q] = 0.0
                A[q, p] = 0.0
    off = float(np.sqrt(2.0 * (np.triu(A, 1) ** 2).sum()))
    return A.diagonal().copy(), off < thresh


# a 6-point subset is degenerate when |det| falls below this fraction of its
# Hadamard bound (product of row norms)
FACET_DEGENERATE_RTOL = 1e-12
_FACET_CHUNK = 20000


def facet_scan(pts, side_tol):
    """Brute-force facet enumeration over all 6-point subsets.

    Assumes the origin is strictly inside the hull of pts (caller checks).
    A subset is a facet when the hyperplane a.p = 1 through its points has
    every remaining point on the a.p <= 1 side; its distance to the origin
    is 1/|a|. Returns (min distance, number of qualifying subsets).
    """
    pts = np.asarray(pts, dtype=float)
    npts = pts.shape[0]
    idx = np.array(list(combinations(range(npts), 6)), dtype=np.intp)
    best = np.inf
    count = 0
    for lo in range(0, idx.shape[0], _FACET_CHUNK):
        sub = idx[lo:lo + _FACET_CHUNK]
        P = pts[sub]                                   # (B, 6, 6)
        dets = np.abs(np.linalg.det(P))
        hadamard = np.prod(np.linalg.norm(P, axis=2), axis=1)
        good = dets > FACET_DEGENERATE_RTOL * np.maximum(1e-300, hadamard)
        if not good.any():
            continue
        a = np.linalg.solve(P[good], np.ones((int(good.sum()), 6, 1)))[:, :, 0]
        vals = a @ pts.T                               # (B', npts)
        is_facet = vals.max(axis=1) <= 1.0 + side_tol
        if is_facet.any():
            dists = 1.0 / np.linalg.norm(a[is_facet], axis=1)
            best = min(best, float(dists.min()))
            count += int(is_facet.sum())
    return best, count


def collocation_pass(theta, sizes, t, cost, A, b, y0, want_grad=True):
    """Collocation loss over the time grid t, optionally with d loss/d theta.

    theta holds each layer's weight matrix (fan_in x fan_out, row major)
    followed by its bias, layers in order; sizes is the layer width list.
    The ansatz is y0 + (1 - exp(-t)) * NN(t), the target field is the
    KKT flow of (cost, A, b), and the loss is the mean squared residual
    over all grid points and components.
    """
    nlay = len(sizes) - 1
    Ws = []
    bs = []
    off = 0
    for l in range(nlay):
        fi, fo = int(sizes[l]), int(sizes[l + 1])
        Ws.append(theta[off:off + fi * fo].reshape(fi, fo))
        off += fi * fo
        bs.append(theta[off:off + fo])
        off += fo

    T = t.shape[0]
    d = int(sizes[-1])
    n = cost.shape[0]

    acts = [t[:, None]]
    tans = [np.ones((T, 1))]
    pres = [None]                       # pre-scale tangents for hidden layers
    for l in range(nlay):
        z = acts[l] @ Ws[l] + bs[l]
        s = tans[l] @ Ws[l]
        if l < nlay - 1:
            a = np.tanh(z)
            v = s * (1.0 - a * a)
        else:
            a, v = z, s
        acts.append(a)
        tans.append(v)
        pres.append(s)
    N = acts[-1]
    Np = tans[-1]

    es = np.exp(-t)[:, None]
    sc = 1.0 - es
    yh = y0[None, :] + sc * N
    dyh = es * N + sc * Np

    x = yh[:, :n]
    u = yh[:, n:]
    q = u + x @ A.T - b[None, :]
    sig = q > 0.0
    p = np.where(sig, q, 0.0)
    r = np.empty_like(yh)
    r[:, :n] = dyh[:, :n] + cost[None, :] + p @ A
    r[:, n:] = dyh[:, n:] - p + u
    loss = float(np.mean(r * r))
    if not want_grad:
        return loss, None

    rbar = (2.0 / (T * d)) * r
    rx = rbar[:, :n]
    ru = rbar[:, n:]
    w = np.where(sig, rx @ A.T - ru, 0.0)
    Nbar = np.empty_like(rbar)
    Nbar[:, :n] = es * rx + sc * (w @ A)
    Nbar[:, n:] = es * ru + sc * (w + ru)
    Npbar = sc * rbar

    grad = np.zeros_like(theta)
    offs = []
    off = 0
    for l in range(nlay):
        fi, fo = int(sizes[l]), int(sizes[l + 1])
        offs.append(off)
        off += fi * fo + fo
    abar, vbar = Nbar, Npbar
    for l in range(nlay - 1, -1, -1):
        fi, fo = int(sizes[l]), int(sizes[l + 1])
        gW = grad[offs[l]:offs[l] + fi * fo].reshape(fi, fo)
        gb = grad[offs[l] + fi * fo:offs[l] + fi * fo + fo]
        if l == nlay - 1:
            zbar, sbar = abar, vbar
        else:
            a = acts[l + 1]
            dact = 1.0 - a * a
            sbar = vbar * dact
            zbar = (abar + vbar * pres[l + 1] * (-2.0 * a)) * dact
        gW += acts[l].T @ zbar + tans[l].T @ sbar
        gb += zbar.sum(axis=0)
        if l > 0:
            abar = zbar @ Ws[l].T
            vbar = sbar @ Ws[l].T
    return loss, grad
