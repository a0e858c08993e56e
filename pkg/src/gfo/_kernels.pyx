# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the three hot kernels in _py_kernels.

Same callables, same contracts, same constants. The arithmetic matches the
numpy fallback up to summation order, so cross-backend agreement is at
rounding level, not bitwise.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, exp, fabs, sqrt
from libc.stdlib cimport free, malloc

cnp.import_array()

JACOBI_MAX_SWEEPS = 100
JACOBI_OFF_TOL = 1e-12
FACET_DEGENERATE_RTOL = 1e-12


def jacobi_eigvals(a):
    """Cyclic Jacobi sweeps. Returns (unsorted diagonal, converged flag)."""
    A_arr = np.array(a, dtype=np.float64, order="C")
    cdef double[:, ::1] A = A_arr
    cdef Py_ssize_t n = A.shape[0]
    cdef Py_ssize_t p, q, r, sweep
    cdef double fro = 0.0, off, apq, theta, tt, c, s, app, aqq, arp, arq
    if n == 1:
        return np.diagonal(A_arr).copy(), True
    for p in range(n):
        for q in range(n):
            fro += A[p, q] * A[p, q]
    cdef double thresh = JACOBI_OFF_TOL * max(1.0, sqrt(fro))
    for sweep in range(JACOBI_MAX_SWEEPS):
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                off += A[p, q] * A[p, q]
        off = sqrt(2.0 * off)
        if off < thresh:
            return np.diagonal(A_arr).copy(), True
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                theta = 0.5 * (A[q, q] - A[p, p]) / apq
                if theta >= 0.0:
                    tt = 1.0 / (theta + sqrt(theta * theta + 1.0))
                else:
                    tt = 1.0 / (theta - sqrt(theta * theta + 1.0))
                c = 1.0 / sqrt(tt * tt + 1.0)
                s = tt * c
                app = A[p, p]
                aqq = A[q, q]
                for r in range(n):
                    if r == p or r == q:
                        continue
                    arp = A[r, p]
                    arq = A[r, q]
                    A[r, p] = c * arp - s * arq
                    A[r, q] = s * arp + c * arq
                    A[p, r] = A[r, p]
                    A[q, r] = A[r, q]
                A[p, p] = app - tt * apq
                A[q, q] = aqq + tt * apq
                A[p, q] = 0.0
                A[q, p] = 0.0
    off = 0.0
    for p in range(n - 1):
        for q in range(p + 1, n):
            off += A[p, q] * A[p, q]
    off = sqrt(2.0 * off)
    return np.diagonal(A_arr).copy(), bool(off < thresh)


cdef int _lu_solve6(double M[6][6], double a[6]) noexcept nogil:
    # in-place LU with partial pivoting; solves M a = rhs where a holds the
    # rhs on entry; returns 0 on a zero pivot
    cdef Py_ssize_t col, row, k, piv
    cdef double big, tmp, f
    for col in range(6):
        piv = col
        big = fabs(M[col][col])
        for row in range(col + 1, 6):
            if fabs(M[row][col]) > big:
                big = fabs(M[row][col])
                piv = row
        if big == 0.0:
            return 0
        if piv != col:
            for k in range(6):
                tmp = M[col][k]
                M[col][k] = M[piv][k]
                M[piv][k] = tmp
            tmp = a[col]
            a[col] = a[piv]
            a[piv] = tmp
        for row in range(col + 1, 6):
            f = M[row][col] / M[col][col]
            M[row][col] = f
            for k in range(col + 1, 6):
                M[row][k] -= f * M[col][k]
            a[row] -= f * a[col]
    for col in range(5, -1, -1):
        for k in range(col + 1, 6):
            a[col] -= M[col][k] * a[k]
        a[col] /= M[col][col]
    return 1


def facet_scan(pts, side_tol):
    """Brute-force facet enumeration over all 6-point subsets.

    Assumes the origin is strictly inside the hull of pts (caller checks).
    Returns (min distance, number of qualifying subsets).
    """
    P_arr = np.ascontiguousarray(pts, dtype=np.float64)
    cdef double[:, ::1] P = P_arr
    cdef Py_ssize_t npts = P.shape[0]
    cdef double tol = float(side_tol)
    cdef double rtol = FACET_DEGENERATE_RTOL
    cdef double best = INFINITY
    cdef Py_ssize_t count = 0
    cdef Py_ssize_t sub[6]
    cdef Py_ssize_t i0, i1, i2, i3, i4, i5, r, k, j
    cdef double M[6][6]
    cdef double a[6]
    cdef double work[6][6]
    cdef double det, had, rn, dot, anorm
    cdef bint ok
    with nogil:
        for i0 in range(npts - 5):
            for i1 in range(i0 + 1, npts - 4):
                for i2 in range(i1 + 1, npts - 3):
                    for i3 in range(i2 + 1, npts - 2):
                        for i4 in range(i3 + 1, npts - 1):
                            for i5 in range(i4 + 1, npts):
                                sub[0] = i0; sub[1] = i1; sub[2] = i2
                                sub[3] = i3; sub[4] = i4; sub[5] = i5
                                had = 1.0
                                for r in range(6):
                                    rn = 0.0
                                    for k in range(6):
                                        M[r][k] = P[sub[r], k]
                                        work[r][k] = M[r][k]
                                        rn += M[r][k] * M[r][k]
                                    had *= sqrt(rn)
                                det = _det6(work)
                                if had < 1e-300:
                                    had = 1e-300
                                if fabs(det) <= rtol * had:
                                    continue
                                for r in range(6):
                                    a[r] = 1.0
                                if not _lu_solve6(M, a):
                                    continue
                                ok = True
                                for j in range(npts):
                                    dot = 0.0
                                    for k in range(6):
                                        dot += a[k] * P[j, k]
                                    if dot > 1.0 + tol:
                                        ok = False
                                        break
                                if not ok:
                                    continue
                                count += 1
                                anorm = 0.0
                                for k in range(6):
                                    anorm += a[k] * a[k]
                                anorm = sqrt(anorm)
                                if anorm > 0.0 and 1.0 / anorm < best:
                                    best = 1.0 / anorm
    return float(best), int(count)


cdef double _det6(double M[6][6]) noexcept nogil:
    # destructive LU determinant with partial pivoting
    cdef Py_ssize_t col, row, k, piv
    cdef double big, tmp, f, det = 1.0
    for col in range(6):
        piv = col
        big = fabs(M[col][col])
        for row in range(col + 1, 6):
            if fabs(M[row][col]) > big:
                big = fabs(M[row][col])
                piv = row
        if big == 0.0:
            return 0.0
        if piv != col:
            det = -det
            for k in range(6):
                tmp = M[col][k]
                M[col][k] = M[piv][k]
                M[piv][k] = tmp
        det *= M[col][col]
        for row in range(col + 1, 6):
            f = M[row][col] / M[col][col]
            for k in range(col + 1, 6):
                M[row][k] -= f * M[col][k]
    return det


cdef void _affine(double[:, ::1] X, double[:, ::1] W, double[::1] bias,
                  double[:, ::1] out) noexcept nogil:
    # out = X @ W + bias, k-outer so the j loop streams W rows
    cdef Py_ssize_t T = X.shape[0], K = X.shape[1], N = W.shape[1]
    cdef Py_ssize_t i, k, j
    cdef double xik
    for i in range(T):
        for j in range(N):
            out[i, j] = bias[j]
        for k in range(K):
            xik = X[i, k]
            for j in range(N):
                out[i, j] += xik * W[k, j]


cdef void _gemm(double[:, ::1] X, double[:, ::1] W,
                double[:, ::1] out) noexcept nogil:
    # out = X @ W, k-outer so the j loop streams W rows
    cdef Py_ssize_t T = X.shape[0], K = X.shape[1], N = W.shape[1]
    cdef Py_ssize_t i, k, j
    cdef double xik
    for i in range(T):
        for j in range(N):
            out[i, j] = 0.0
        for k in range(K):
            xik = X[i, k]
            for j in range(N):
                out[i, j] += xik * W[k, j]


cdef double _dot4(const double* a, const double* b, Py_ssize_t K) noexcept nogil:
    # four explicit accumulators so the reduction can run in parallel lanes;
    # summation order is fixed in source, deterministic per backend
    cdef double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0
    cdef Py_ssize_t k = 0
    while k + 4 <= K:
        s0 += a[k] * b[k]
        s1 += a[k + 1] * b[k + 1]
        s2 += a[k + 2] * b[k + 2]
        s3 += a[k + 3] * b[k + 3]
        k += 4
    while k < K:
        s0 += a[k] * b[k]
        k += 1
    return (s0 + s1) + (s2 + s3)


cdef void _affine_dot(double[:, ::1] X, double[:, ::1] Wt, double[::1] bias,
                      double[:, ::1] out) noexcept nogil:
    # out = X @ Wt.T + bias with Wt pre-transposed (N, K); each output entry
    # is a dot of two contiguous runs, the right shape when N is tiny
    cdef Py_ssize_t T = X.shape[0], K = X.shape[1], N = Wt.shape[0]
    cdef Py_ssize_t i, j
    for i in range(T):
        for j in range(N):
            out[i, j] = bias[j] + _dot4(&X[i, 0], &Wt[j, 0], K)


cdef void _gemm_dot(double[:, ::1] X, double[:, ::1] Wt,
                    double[:, ::1] out) noexcept nogil:
    # out = X @ Wt.T with Wt pre-transposed (N, K)
    cdef Py_ssize_t T = X.shape[0], K = X.shape[1], N = Wt.shape[0]
    cdef Py_ssize_t i, j
    for i in range(T):
        for j in range(N):
            out[i, j] = _dot4(&X[i, 0], &Wt[j, 0], K)


cdef void _gemm_tn_acc(double[:, ::1] X, double[:, ::1] Y,
                       double[:, ::1] out) noexcept nogil:
    # out += X.T @ Y with X (T, fi), Y (T, fo), out (fi, fo); one output
    # column at a time so the inner update has no loop-carried dependency
    cdef Py_ssize_t T = X.shape[0], FI = X.shape[1], FO = Y.shape[1]
    cdef Py_ssize_t t, i, j
    cdef double ytj
    cdef double* col = <double*> malloc(FI * sizeof(double))
    if col == NULL:
        with gil:
            raise MemoryError()
    for j in range(FO):
        for i in range(FI):
            col[i] = 0.0
        for t in range(T):
            ytj = Y[t, j]
            for i in range(FI):
                col[i] += X[t, i] * ytj
        for i in range(FI):
            out[i, j] += col[i]
    free(col)


# scratch arrays reused across passes with the same grid and layer widths;
# training hits this thousands of times and large fresh allocations fall
# through to mmap. Not safe for concurrent callers, which matches the
# package's single-logical-thread model.
_WORKSPACES = {}
_WORKSPACE_CAP = 8


def _workspace(T, sizes):
    key = (int(T),) + tuple(int(x) for x in sizes)
    ws = _WORKSPACES.get(key)
    if ws is None:
        if len(_WORKSPACES) >= _WORKSPACE_CAP:
            _WORKSPACES.clear()
        ws = {}
        _WORKSPACES[key] = ws
    return ws


def _buf(ws, name, shape, dtype=np.float64):
    arr = ws.get(name)
    if arr is None:
        arr = np.empty(shape, dtype)
        ws[name] = arr
    return arr


def collocation_pass(theta, sizes, t, cost, A, b, y0, want_grad=True):
    """Collocation loss over the time grid t, optionally with d loss/d theta.

    Layout and math mirror the numpy fallback: theta holds each layer's
    weight matrix (fan_in x fan_out, row major) followed by its bias; the
    ansatz is y0 + (1 - exp(-t)) * NN(t); the loss is the mean squared
    residual of the KKT flow of (cost, A, b) over all grid points.
    """
    theta_arr = np.ascontiguousarray(theta, dtype=np.float64)
    t_arr = np.ascontiguousarray(t, dtype=np.float64)
    cost_arr = np.ascontiguousarray(cost, dtype=np.float64)
    A_arr = np.ascontiguousarray(A, dtype=np.float64)
    b_arr = np.ascontiguousarray(b, dtype=np.float64)
    y0_arr = np.ascontiguousarray(y0, dtype=np.float64)

    cdef Py_ssize_t nlay = len(sizes) - 1
    cdef Py_ssize_t T = t_arr.shape[0]
    cdef Py_ssize_t d = int(sizes[nlay])
    cdef Py_ssize_t n = cost_arr.shape[0]
    cdef Py_ssize_t m = d - n

    Ws = []
    bs = []
    offs = []
    cdef Py_ssize_t off = 0, fi, fo, l
    for l in range(nlay):
        fi = int(sizes[l])
        fo = int(sizes[l + 1])
        offs.append(off)
        Ws.append(theta_arr[off:off + fi * fo].reshape(fi, fo))
        off += fi * fo
        bs.append(theta_arr[off:off + fo])
        off += fo

    ws = _workspace(T, sizes)
    tcol = _buf(ws, "tcol", (T, 1))
    tcol[:, 0] = t_arr
    ones = ws.get("ones")
    if ones is None:
        ones = np.ones((T, 1))
        ws["ones"] = ones
    acts = [tcol]
    tans = [ones]
    pres = [None]
    cdef double[:, ::1] av, vv, prev_s
    cdef Py_ssize_t i, j
    cdef double aij
    for l in range(nlay):
        fi = int(sizes[l])
        fo = int(sizes[l + 1])
        z = _buf(ws, "z%d" % l, (T, fo))
        s = _buf(ws, "s%d" % l, (T, fo))
        if fo <= 8 and fi >= 16:
            Wt = _buf(ws, "wt%d" % l, (fo, fi))
            np.copyto(Wt, Ws[l].T)
            _affine_dot(acts[l], Wt, bs[l], z)
            _gemm_dot(tans[l], Wt, s)
        else:
            _affine(acts[l], Ws[l], bs[l], z)
            _gemm(tans[l], Ws[l], s)
        if l < nlay - 1:
            # numpy's simd tanh; the scalar libm call is 10x slower here
            a = _buf(ws, "a%d" % l, (T, fo))
            np.tanh(z, out=a)
            v = _buf(ws, "v%d" % l, (T, fo))
            av = a
            vv = v
            prev_s = s
            for i in range(T):
                for j in range(fo):
                    aij = av[i, j]
                    vv[i, j] = prev_s[i, j] * (1.0 - aij * aij)
            acts.append(a)
            tans.append(v)
            pres.append(s)
        else:
            acts.append(z)
            tans.append(s)
            pres.append(None)
    N_arr = acts[nlay]
    Np_arr = tans[nlay]

    es_arr = _buf(ws, "es", (T,))
    cdef double[::1] es = es_arr, tv = t_arr
    for i in range(T):
        es[i] = exp(-tv[i])

    r_arr = _buf(ws, "r", (T, d))
    p_arr = _buf(ws, "p", (T, m))
    sig_arr = _buf(ws, "sig", (T, m), np.uint8)
    cdef double[:, ::1] Nv = N_arr, Npv = Np_arr, rv = r_arr, pv = p_arr
    cdef double[:, ::1] Av = A_arr
    cdef cnp.uint8_t[:, ::1] sigv = sig_arr
    cdef double[::1] costv = cost_arr, bv = b_arr, y0v = y0_arr
    cdef double sc, q, yx, yu, dyx, dyu, acc, loss = 0.0
    cdef Py_ssize_t row, col, k

    # q = u + A x - b, p = max(q, 0), then the two residual blocks
    for i in range(T):
        sc = 1.0 - es[i]
        for row in range(m):
            q = y0v[n + row] + sc * Nv[i, n + row] - bv[row]
            for k in range(n):
                q += Av[row, k] * (y0v[k] + sc * Nv[i, k])
            if q > 0.0:
                pv[i, row] = q
                sigv[i, row] = 1
            else:
                pv[i, row] = 0.0
                sigv[i, row] = 0
        for col in range(n):
            dyx = es[i] * Nv[i, col] + sc * Npv[i, col]
            acc = dyx + costv[col]
            for row in range(m):
                acc += pv[i, row] * Av[row, col]
            rv[i, col] = acc
        for row in range(m):
            yu = y0v[n + row] + sc * Nv[i, n + row]
            dyu = es[i] * Nv[i, n + row] + sc * Npv[i, n + row]
            rv[i, n + row] = dyu - pv[i, row] + yu
    for i in range(T):
        for col in range(d):
            loss += rv[i, col] * rv[i, col]
    loss /= <double>(T * d)
    if not want_grad:
        return float(loss), None

    grad_arr = np.zeros_like(theta_arr)
    rbar_arr = _buf(ws, "rbar", (T, d))
    np.multiply(r_arr, 2.0 / (T * d), out=rbar_arr)
    Nbar_arr = _buf(ws, "nbar", (T, d))
    Npbar_arr = _buf(ws, "npbar", (T, d))
    w_arr = _buf(ws, "w", (T, m))
    cdef double[:, ::1] rbarv = rbar_arr, Nbarv = Nbar_arr
    cdef double[:, ::1] Npbarv = Npbar_arr, wv = w_arr
    cdef double wval
    for i in range(T):
        sc = 1.0 - es[i]
        for row in range(m):
            if sigv[i, row]:
                wval = -rbarv[i, n + row]
                for k in range(n):
                    wval += rbarv[i, k] * Av[row, k]
                wv[i, row] = wval
            else:
                wv[i, row] = 0.0
        for col in range(n):
            acc = 0.0
            for row in range(m):
                acc += wv[i, row] * Av[row, col]
            Nbarv[i, col] = es[i] * rbarv[i, col] + sc * acc
        for row in range(m):
            Nbarv[i, n + row] = es[i] * rbarv[i, n + row] + sc * (
                wv[i, row] + rbarv[i, n + row])
        for col in range(d):
            Npbarv[i, col] = sc * rbarv[i, col]

    abar = Nbar_arr
    vbar = Npbar_arr
    cdef double[:, ::1] abarv, vbarv, zbarv, sbarv, actv, prev
    cdef double da, ai
    for l in range(nlay - 1, -1, -1):
        fi = int(sizes[l])
        fo = int(sizes[l + 1])
        if l == nlay - 1:
            zbar = abar
            sbar = vbar
        else:
            zbar = _buf(ws, "zbar%d" % l, (T, fo))
            sbar = _buf(ws, "sbar%d" % l, (T, fo))
            abarv = abar; vbarv = vbar
            zbarv = zbar; sbarv = sbar
            actv = acts[l + 1]; prev = pres[l + 1]
            for i in range(T):
                for j in range(fo):
                    ai = actv[i, j]
                    da = 1.0 - ai * ai
                    sbarv[i, j] = vbarv[i, j] * da
                    zbarv[i, j] = (abarv[i, j]
                                   + vbarv[i, j] * prev[i, j] * (-2.0 * ai)) * da
        gW = grad_arr[offs[l]:offs[l] + fi * fo].reshape(fi, fo)
        gb = grad_arr[offs[l] + fi * fo:offs[l] + fi * fo + fo]
        _gemm_tn_acc(acts[l], zbar, gW)
        _gemm_tn_acc(tans[l], sbar, gW)
        _acc_cols(zbar, gb)
        if l > 0:
            abar_next = _buf(ws, "abar%d" % l, (T, fi))
            vbar_next = _buf(ws, "vbar%d" % l, (T, fi))
            Wt = _buf(ws, "wt%d" % l, (fo, fi))
            np.copyto(Wt, Ws[l].T)
            _gemm(zbar, Wt, abar_next)
            _gemm(sbar, Wt, vbar_next)
            abar = abar_next
            vbar = vbar_next
    return float(loss), grad_arr


cdef void _acc_cols(double[:, ::1] X, double[::1] out) noexcept nogil:
    # out += column sums of X
    cdef Py_ssize_t T = X.shape[0], N = X.shape[1]
    cdef Py_ssize_t i, j
    for i in range(T):
        for j in range(N):
            out[j] += X[i, j]
