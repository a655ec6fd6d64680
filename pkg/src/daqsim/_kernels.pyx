# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops for the batched state-vector engine.

All routines work in place on a float64 view of a C-contiguous complex128
array of shape ``(batch, 2**n)``; complex numbers are handled as explicit
(re, im) pairs so the C compiler never falls back to ``__muldc3``.
"""
import numpy as np


cdef inline void _pair(double* p0, double* p1, double* u) noexcept nogil:
    cdef double x0r = p0[0], x0i = p0[1], x1r = p1[0], x1i = p1[1]
    p0[0] = u[0] * x0r - u[1] * x0i + u[2] * x1r - u[3] * x1i
    p0[1] = u[0] * x0i + u[1] * x0r + u[2] * x1i + u[3] * x1r
    p1[0] = u[4] * x0r - u[5] * x0i + u[6] * x1r - u[7] * x1i
    p1[1] = u[4] * x0i + u[5] * x0r + u[6] * x1i + u[7] * x1r


cdef inline void _apply_1q_row(double* a, Py_ssize_t n_amp, Py_ssize_t stride,
                               double* u) noexcept nogil:
    cdef Py_ssize_t base, k
    cdef double* p0
    cdef double* p1
    cdef double v[8]
    for k in range(8):
        v[k] = u[k]
    if stride == 1:
        for k in range(0, 2 * n_amp, 4):
            _pair(a + k, a + k + 2, v)
        return
    base = 0
    while base < n_amp:
        p0 = a + 2 * base
        p1 = p0 + 2 * stride
        for k in range(0, 2 * stride, 2):
            _pair(p0 + k, p1 + k, v)
        base += 2 * stride


def apply_1q(double[:, ::1] st, Py_ssize_t qubit, double[::1] u):
    """Apply one 2x2 unitary (flattened to 8 reals) to ``qubit`` of every row."""
    cdef Py_ssize_t b, n_amp = st.shape[1] // 2
    cdef Py_ssize_t stride = (<Py_ssize_t>1) << qubit
    with nogil:
        for b in range(st.shape[0]):
            _apply_1q_row(&st[b, 0], n_amp, stride, &u[0])


def apply_layer(double[:, ::1] st, long long[::1] qubits, double[:, ::1] us):
    """Apply several single-qubit gates row by row so each row stays in cache."""
    cdef Py_ssize_t b, g, n_amp = st.shape[1] // 2
    cdef Py_ssize_t m = qubits.shape[0]
    with nogil:
        for b in range(st.shape[0]):
            for g in range(m):
                _apply_1q_row(&st[b, 0], n_amp, (<Py_ssize_t>1) << qubits[g], &us[g, 0])


def apply_cnot(double[:, ::1] st, Py_ssize_t control, Py_ssize_t target):
    cdef Py_ssize_t b, k, j0, j1, n_amp = st.shape[1] // 2
    cdef Py_ssize_t cbit = (<Py_ssize_t>1) << control
    cdef Py_ssize_t tbit = (<Py_ssize_t>1) << target
    cdef double tr, ti
    cdef double* a
    with nogil:
        for b in range(st.shape[0]):
            a = &st[b, 0]
            for k in range(n_amp):
                if (k & cbit) and not (k & tbit):
                    j0 = 2 * k
                    j1 = 2 * (k | tbit)
                    tr = a[j0]
                    ti = a[j0 + 1]
                    a[j0] = a[j1]
                    a[j0 + 1] = a[j1 + 1]
                    a[j1] = tr
                    a[j1 + 1] = ti


def group_probs(double[:, ::1] st, long long[::1] rows, int[::1] idx, Py_ssize_t n_groups):
    """Sum ``|a_k|**2`` of the selected rows into the bins given by ``idx``."""
    cdef Py_ssize_t r, k, n_amp = st.shape[1] // 2
    cdef Py_ssize_t n_rows = rows.shape[0]
    out = np.zeros((n_rows, n_groups), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef double* a
    with nogil:
        for r in range(n_rows):
            a = &st[rows[r], 0]
            for k in range(n_amp):
                o[r, idx[k]] += a[2 * k] * a[2 * k] + a[2 * k + 1] * a[2 * k + 1]
    return out


def scale_gather(double[:, ::1] st, long long[::1] rows, int[::1] idx, double[:, ::1] table):
    """Multiply amplitude ``k`` of row ``rows[r]`` by the complex ``table[r, idx[k]]``."""
    cdef Py_ssize_t r, k, g, n_amp = st.shape[1] // 2
    cdef Py_ssize_t n_rows = rows.shape[0]
    cdef double xr, xi, fr, fi
    cdef double* a
    cdef double* f
    with nogil:
        for r in range(n_rows):
            a = &st[rows[r], 0]
            f = &table[r, 0]
            for k in range(n_amp):
                g = 2 * idx[k]
                fr = f[g]
                fi = f[g + 1]
                xr = a[2 * k]
                xi = a[2 * k + 1]
                a[2 * k] = fr * xr - fi * xi
                a[2 * k + 1] = fr * xi + fi * xr


def jump_row(double[:, ::1] st, Py_ssize_t row, int[::1] idx, double[::1] gamma_g,
             double[::1] gamma_q, double u1, double u2, double total):
    """Quantum jump on one row: pick basis state ``k`` with weight ``|a_k|^2 G_k``,
    then one of its excited qubits with weight ``gamma_q``; apply sigma-minus
    there and renormalize. ``total`` is the summed weight. Returns the qubit index."""
    cdef Py_ssize_t k, i, kstar = -1, chosen = -1, n_amp = st.shape[1] // 2
    cdef Py_ssize_t n = gamma_q.shape[0], bit
    cdef double acc = 0.0, target, w, norm = 0.0, s
    cdef double* a = &st[row, 0]
    with nogil:
        target = u1 * total
        k = 0
        while k < n_amp:
            w = (a[2 * k] * a[2 * k] + a[2 * k + 1] * a[2 * k + 1]) * gamma_g[idx[k]]
            if w > 0:
                kstar = k
                acc += w
                if acc > target:
                    break
            k += 1
        total = 0.0
        for i in range(n):
            if (kstar >> i) & 1:
                total += gamma_q[i]
        target = u2 * total
        acc = 0.0
        for i in range(n):
            if (kstar >> i) & 1:
                acc += gamma_q[i]
                if chosen < 0 and acc > target:
                    chosen = i
        if chosen < 0:
            for i in range(n):
                if (kstar >> i) & 1:
                    chosen = i
        bit = (<Py_ssize_t>1) << chosen
        for k in range(n_amp):
            if k & bit:
                norm += a[2 * k] * a[2 * k] + a[2 * k + 1] * a[2 * k + 1]
                a[2 * (k ^ bit)] = a[2 * k]
                a[2 * (k ^ bit) + 1] = a[2 * k + 1]
                a[2 * k] = 0.0
                a[2 * k + 1] = 0.0
        s = 1.0 / norm ** 0.5
        for k in range(2 * n_amp):
            a[k] *= s
    return chosen
