# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled query and fitting kernels; mirrors ``_pykernels`` operation for operation."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, exp, pow
from libc.stdlib cimport malloc, free, qsort
from scipy.linalg.cython_lapack cimport dgesvd

cnp.import_array()

cdef enum:
    EPANECHNIKOV = 0

cdef double _EPS = np.finfo(np.float64).eps


cdef inline double _sqdist(const double[:, ::1] data, Py_ssize_t i,
                           const double[::1] q) noexcept nogil:
    cdef double acc = 0.0, t
    cdef Py_ssize_t a
    for a in range(data.shape[1]):
        t = data[i, a] - q[a]
        acc = acc + t * t
    return acc


cdef inline bint _worse(double d2a, long ia, double d2b, long ib) noexcept nogil:
    # (d2a, ia) > (d2b, ib) lexicographically
    return d2a > d2b or (d2a == d2b and ia > ib)


cdef void _sift_down(double* hd, long* hi, Py_ssize_t size, Py_ssize_t pos) noexcept nogil:
    cdef Py_ssize_t child
    cdef double td
    cdef long ti
    while True:
        child = 2 * pos + 1
        if child >= size:
            break
        if child + 1 < size and _worse(hd[child + 1], hi[child + 1], hd[child], hi[child]):
            child += 1
        if _worse(hd[child], hi[child], hd[pos], hi[pos]):
            td = hd[pos]; hd[pos] = hd[child]; hd[child] = td
            ti = hi[pos]; hi[pos] = hi[child]; hi[child] = ti
            pos = child
        else:
            break


cdef void _sift_up(double* hd, long* hi, Py_ssize_t pos) noexcept nogil:
    cdef Py_ssize_t parent
    cdef double td
    cdef long ti
    while pos > 0:
        parent = (pos - 1) // 2
        if _worse(hd[pos], hi[pos], hd[parent], hi[parent]):
            td = hd[pos]; hd[pos] = hd[parent]; hd[parent] = td
            ti = hi[pos]; hi[pos] = hi[parent]; hi[parent] = ti
            pos = parent
        else:
            break


def knn(tree, q_in, Py_ssize_t k, long exclude):
    cdef const double[:, ::1] data = tree.data
    cdef const long[::1] perm = tree.perm
    cdef const long[::1] start = tree.start
    cdef const long[::1] end = tree.end
    cdef const long[::1] dim = tree.dim
    cdef const double[::1] split = tree.split
    cdef const long[::1] left = tree.left
    cdef const long[::1] right = tree.right
    cdef const double[::1] q = np.ascontiguousarray(q_in, dtype=np.float64)
    cdef Py_ssize_t nnodes = start.shape[0]

    cdef cnp.ndarray[double, ndim=1] hd_arr = np.empty(k, dtype=np.float64)
    cdef cnp.ndarray[long, ndim=1] hi_arr = np.empty(k, dtype=np.int64)
    cdef double* hd = <double*> hd_arr.data
    cdef long* hi = <long*> hi_arr.data
    cdef Py_ssize_t size = 0

    cdef long* stack_node = <long*> malloc(2 * nnodes * sizeof(long) + 16)
    cdef double* stack_bound = <double*> malloc(2 * nnodes * sizeof(double) + 16)
    cdef Py_ssize_t top = 0, pos
    cdef long node, i, near, far
    cdef double bound, d2, diff
    cdef int d

    with nogil:
        stack_node[0] = 0
        stack_bound[0] = 0.0
        top = 1
        while top > 0:
            top -= 1
            node = stack_node[top]
            bound = stack_bound[top]
            if size == k and bound > hd[0]:
                continue
            d = dim[node]
            if d < 0:
                for pos in range(start[node], end[node]):
                    i = perm[pos]
                    if i == exclude:
                        continue
                    d2 = _sqdist(data, i, q)
                    if size < k:
                        hd[size] = d2
                        hi[size] = i
                        size += 1
                        _sift_up(hd, hi, size - 1)
                    elif _worse(hd[0], hi[0], d2, i):
                        hd[0] = d2
                        hi[0] = i
                        _sift_down(hd, hi, size, 0)
                continue
            diff = q[d] - split[node]
            if diff < 0:
                near = left[node]
                far = right[node]
            else:
                near = right[node]
                far = left[node]
            stack_node[top] = far
            stack_bound[top] = diff * diff
            top += 1
            stack_node[top] = near
            stack_bound[top] = bound
            top += 1
    free(stack_node)
    free(stack_bound)

    order = np.lexsort((hi_arr[:size], hd_arr[:size]))
    return hi_arr[:size][order].copy(), hd_arr[:size][order].copy()


def radius(tree, q_in, double r):
    cdef const double[:, ::1] data = tree.data
    cdef const long[::1] perm = tree.perm
    cdef const long[::1] start = tree.start
    cdef const long[::1] end = tree.end
    cdef const long[::1] dim = tree.dim
    cdef const double[::1] split = tree.split
    cdef const long[::1] left = tree.left
    cdef const long[::1] right = tree.right
    cdef const double[::1] q = np.ascontiguousarray(q_in, dtype=np.float64)
    cdef Py_ssize_t nnodes = start.shape[0]
    cdef Py_ssize_t n = data.shape[0]
    cdef double r2_prune = r * r * (1.0 + 1e-12)

    cdef cnp.ndarray[long, ndim=1] out_arr = np.empty(n, dtype=np.int64)
    cdef long* out = <long*> out_arr.data
    cdef Py_ssize_t count = 0
    cdef long* stack_node = <long*> malloc(2 * nnodes * sizeof(long) + 16)
    cdef Py_ssize_t top = 0, pos
    cdef long node, i, near, far
    cdef double diff
    cdef int d

    with nogil:
        stack_node[0] = 0
        top = 1
        while top > 0:
            top -= 1
            node = stack_node[top]
            d = dim[node]
            if d < 0:
                for pos in range(start[node], end[node]):
                    i = perm[pos]
                    if sqrt(_sqdist(data, i, q)) <= r:
                        out[count] = i
                        count += 1
                continue
            diff = q[d] - split[node]
            if diff < 0:
                near = left[node]
                far = right[node]
            else:
                near = right[node]
                far = left[node]
            if diff * diff <= r2_prune:
                stack_node[top] = far
                top += 1
            stack_node[top] = near
            top += 1
    free(stack_node)
    return np.sort(out_arr[:count])


cdef int _cmp_int(const void* a, const void* b) noexcept nogil:
    cdef int x = (<const int*> a)[0]
    cdef int y = (<const int*> b)[0]
    return (x > y) - (x < y)


cdef int _ball(const double[:, ::1] data, const long[::1] perm, const long[::1] start,
               const long[::1] end, const long[::1] dim, const double[::1] split,
               const long[::1] left, const long[::1] right, const double[:] q,
               double r2_prune, long* stack, int* out) noexcept nogil:
    """Row ids of leaves reachable within the pruning radius (superset of the ball)."""
    cdef Py_ssize_t top = 1, pos
    cdef long node
    cdef int count = 0, d
    cdef double diff
    stack[0] = 0
    while top > 0:
        top -= 1
        node = stack[top]
        d = dim[node]
        if d < 0:
            for pos in range(start[node], end[node]):
                out[count] = perm[pos]
                count += 1
            continue
        diff = q[d] - split[node]
        if diff < 0:
            if diff * diff <= r2_prune:
                stack[top] = right[node]
                top += 1
            stack[top] = left[node]
            top += 1
        else:
            if diff * diff <= r2_prune:
                stack[top] = left[node]
                top += 1
            stack[top] = right[node]
            top += 1
    return count


cdef inline double _weight(double d2, double h, double scale, int family) noexcept nogil:
    cdef double u2 = d2 / (h * h)
    if family == EPANECHNIKOV:
        if u2 < 1.0:
            return scale * (1.0 - u2)
        return 0.0
    return scale * exp(-0.5 * u2)


def fit_points(X_in, Y_in, Q_in, exclude_in, double h, int family, exps_in,
               double weight_scale=1.0, tree=None):
    """Batched local polynomial fits; see ``_pykernels.fit_points``.

    With a compact kernel and a ``FlatTree`` over ``X_in``, candidate rows
    come from a tree walk instead of a full scan; the support is sorted by
    row id either way, so both paths give identical results.
    """
    cdef const double[:, ::1] X = np.ascontiguousarray(X_in, dtype=np.float64)
    cdef const double[::1] Y = np.ascontiguousarray(Y_in, dtype=np.float64)
    cdef const double[:, ::1] Q = np.ascontiguousarray(Q_in, dtype=np.float64)
    cdef const long[::1] exclude = np.ascontiguousarray(exclude_in, dtype=np.int64)
    cdef const long[:, ::1] exps = np.ascontiguousarray(exps_in, dtype=np.int64)
    cdef int n = X.shape[0]
    cdef int D = X.shape[1]
    cdef Py_ssize_t m = Q.shape[0]
    cdef int p = exps.shape[0]

    coef_arr = np.full((m, p), np.nan)
    s_self_arr = np.full(m, np.nan)
    support_arr = np.zeros(m, dtype=np.int64)
    rank_arr = np.zeros(m, dtype=np.int64)
    cdef double[:, ::1] coef = coef_arr
    cdef double[::1] s_self = s_self_arr
    cdef long[::1] support = support_arr
    cdef long[::1] rank = rank_arr

    cdef double scale = pow(h, -D) * weight_scale
    cdef int minmp = n if n < p else p
    cdef double* w = <double*> malloc(n * sizeof(double))
    cdef double* d2 = <double*> malloc(n * sizeof(double))
    cdef int* keep = <int*> malloc(n * sizeof(int))
    cdef double* A = <double*> malloc(n * p * sizeof(double))
    cdef double* b = <double*> malloc(n * sizeof(double))
    cdef double* s = <double*> malloc(p * sizeof(double))
    cdef double* U = <double*> malloc(n * p * sizeof(double))
    cdef double* VT = <double*> malloc(p * p * sizeof(double))
    cdef double* ck = <double*> malloc(p * sizeof(double))
    cdef double* diff = <double*> malloc(D * sizeof(double))
    cdef int* cand = <int*> malloc(n * sizeof(int))
    cdef int ncand
    cdef bint use_tree = tree is not None and family == EPANECHNIKOV
    cdef double r2_prune = h * h * (1.0 + 1e-12)
    cdef const long[::1] t_perm, t_start, t_end, t_dim, t_left, t_right
    cdef const double[::1] t_split
    cdef long* stack = NULL
    if use_tree:
        if tree.data.shape[0] != n:
            raise ValueError("tree does not match the data")
        t_perm = tree.perm
        t_start = tree.start
        t_end = tree.end
        t_dim = tree.dim
        t_split = tree.split
        t_left = tree.left
        t_right = tree.right
        stack = <long*> malloc((2 * t_start.shape[0] + 16) * sizeof(long))

    cdef char jobu = b'S'
    cdef char jobvt = b'S'
    cdef int info = 0, lwork = -1, ms, mn, ldvt, r, c, a, e, t, kk
    cdef double wq, tol, acc, v, sw
    cdef bint has_self
    cdef Py_ssize_t j
    cdef int i

    # workspace sized for the largest possible support
    ms = n
    ldvt = minmp
    dgesvd(&jobu, &jobvt, &ms, &p, A, &ms, s, U, &ms, VT, &ldvt, &wq, &lwork, &info)
    lwork = <int> wq
    if lwork < 5 * (n + p) + 64:
        lwork = 5 * (n + p) + 64
    cdef double* work = <double*> malloc(lwork * sizeof(double))

    try:
        with nogil:
            for j in range(m):
                ms = 0
                has_self = False
                ncand = n + 1
                if use_tree:
                    ncand = _ball(X, t_perm, t_start, t_end, t_dim, t_split, t_left, t_right,
                                  Q[j], r2_prune, stack, cand)
                    # wide supports: sorting costs more than scanning
                    if ncand * 8 <= n:
                        qsort(cand, ncand, sizeof(int), _cmp_int)
                    else:
                        ncand = n + 1
                if ncand > n:
                    ncand = n
                    for i in range(n):
                        cand[i] = i
                for t in range(ncand):
                    i = cand[t]
                    d2[i] = _sqdist(X, i, Q[j])
                    w[i] = _weight(d2[i], h, scale, family)
                    if i == exclude[j]:
                        w[i] = 0.0
                    if w[i] > 0.0:
                        keep[ms] = i
                        ms += 1
                        if d2[i] == 0.0:
                            has_self = True
                support[j] = ms
                if ms == 0:
                    continue
                for t in range(ms):
                    i = keep[t]
                    sw = sqrt(w[i])
                    for a in range(D):
                        diff[a] = X[i, a] - Q[j, a]
                    for c in range(p):
                        v = 1.0
                        for a in range(D):
                            for e in range(exps[c, a]):
                                v = v * diff[a]
                        A[c * ms + t] = v * sw
                    b[t] = Y[i] * sw
                mn = ms if ms < p else p
                ldvt = mn
                dgesvd(&jobu, &jobvt, &ms, &p, A, &ms, s, U, &ms, VT, &ldvt,
                       work, &lwork, &info)
                if info != 0:
                    support[j] = -1
                    continue
                tol = _EPS * (ms if ms > p else p) * s[0]
                r = 0
                for kk in range(mn):
                    if s[kk] > tol:
                        r += 1
                rank[j] = r
                for kk in range(r):
                    acc = 0.0
                    for t in range(ms):
                        acc = acc + U[kk * ms + t] * b[t]
                    ck[kk] = acc / s[kk]
                for c in range(p):
                    acc = 0.0
                    for kk in range(r):
                        acc = acc + VT[c * ldvt + kk] * ck[kk]
                    coef[j, c] = acc
                if has_self:
                    acc = 0.0
                    for kk in range(r):
                        v = VT[kk] / s[kk]
                        acc = acc + v * v
                    s_self[j] = acc * scale
    finally:
        free(w); free(d2); free(keep); free(A); free(b); free(s)
        free(U); free(VT); free(ck); free(diff); free(work); free(cand)
        if stack != NULL:
            free(stack)

    if (support_arr < 0).any():
        raise ArithmeticError("LAPACK dgesvd failed to converge")
    return coef_arr, s_self_arr, support_arr, rank_arr
