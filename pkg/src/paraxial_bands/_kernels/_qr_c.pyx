# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled dense complex eigensolver.

Mirror of ``_qr_py``: balance, Householder Hessenberg reduction, single-shift
complex QR to Schur form, triangular back-substitution.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, sqrt, hypot

cnp.import_array()

from .errors import ConvergenceError

cdef extern from "complex.h" nogil:
    double complex csqrt(double complex z)
    double complex conj(double complex z)
    double cabs(double complex z)
    double creal(double complex z)
    double cimag(double complex z)

cdef double EPS = np.finfo(float).eps
cdef double TINY = np.finfo(float).tiny


cdef inline double cabs1(double complex z) nogil:
    return fabs(creal(z)) + fabs(cimag(z))


cdef void _balance(double complex[:, ::1] A, double[::1] d) nogil:
    cdef Py_ssize_t n = A.shape[0], i, j
    cdef double c, r, g, f, s
    cdef bint done = False
    while not done:
        done = True
        for i in range(n):
            c = 0.0
            r = 0.0
            for j in range(n):
                if j != i:
                    c += cabs1(A[j, i])
                    r += cabs1(A[i, j])
            if c == 0.0 or r == 0.0:
                continue
            g = r / 2.0
            f = 1.0
            s = c + r
            while c < g:
                f *= 2.0
                c *= 4.0
            g = r * 2.0
            while c >= g:
                f /= 2.0
                c /= 4.0
            if (c + r) / f < 0.95 * s:
                done = False
                d[i] *= f
                for j in range(n):
                    A[i, j] = A[i, j] / f
                    A[j, i] = A[j, i] * f


cdef void _hessenberg(double complex[:, ::1] H, double complex[:, ::1] Q, double complex[::1] v) nogil:
    cdef Py_ssize_t n = H.shape[0], k, i, j, m
    cdef double xnorm, vnorm, ax0
    cdef double complex alpha, phase, acc
    for k in range(n - 2):
        m = n - k - 1
        xnorm = 0.0
        for i in range(m):
            v[i] = H[k + 1 + i, k]
            xnorm += creal(v[i]) * creal(v[i]) + cimag(v[i]) * cimag(v[i])
        xnorm = sqrt(xnorm)
        if xnorm == 0.0:
            continue
        ax0 = cabs(v[0])
        phase = v[0] / ax0 if ax0 != 0.0 else 1.0
        alpha = -phase * xnorm
        v[0] = v[0] - alpha
        vnorm = 0.0
        for i in range(m):
            vnorm += creal(v[i]) * creal(v[i]) + cimag(v[i]) * cimag(v[i])
        vnorm = sqrt(vnorm)
        if vnorm == 0.0:
            continue
        for i in range(m):
            v[i] = v[i] / vnorm
        # H[k+1:, k:] -= 2 v (v^H H[k+1:, k:])
        for j in range(k, n):
            acc = 0.0
            for i in range(m):
                acc = acc + conj(v[i]) * H[k + 1 + i, j]
            acc = 2.0 * acc
            for i in range(m):
                H[k + 1 + i, j] = H[k + 1 + i, j] - v[i] * acc
        # H[:, k+1:] -= 2 (H[:, k+1:] v) v^H ; same for Q
        for j in range(n):
            acc = 0.0
            for i in range(m):
                acc = acc + H[j, k + 1 + i] * v[i]
            acc = 2.0 * acc
            for i in range(m):
                H[j, k + 1 + i] = H[j, k + 1 + i] - acc * conj(v[i])
            acc = 0.0
            for i in range(m):
                acc = acc + Q[j, k + 1 + i] * v[i]
            acc = 2.0 * acc
            for i in range(m):
                Q[j, k + 1 + i] = Q[j, k + 1 + i] - acc * conj(v[i])
        H[k + 1, k] = alpha
        for i in range(k + 2, n):
            H[i, k] = 0.0


cdef inline void _givens(double complex a, double complex b, double *c, double complex *s) nogil:
    cdef double aa, nrm
    if b == 0:
        c[0] = 1.0
        s[0] = 0.0
    elif a == 0:
        c[0] = 0.0
        s[0] = conj(b) / cabs(b)
    else:
        aa = cabs(a)
        nrm = hypot(aa, cabs(b))
        c[0] = aa / nrm
        s[0] = (a / aa) * conj(b) / nrm


cdef int _schur(double complex[:, ::1] H, double complex[:, ::1] Z, int max_sweeps) nogil:
    """Returns sweeps used, or -1 on non-convergence."""
    cdef Py_ssize_t n = H.shape[0], hi = n - 1, l, k, j, j0, i1, i
    cdef int sweeps = 0, its = 0
    cdef double s_, c
    cdef double complex s, mu, a, b, cc, d, half, disc, r1, r2, x, y, t0, t1
    while hi > 0:
        l = hi
        while l > 0:
            s_ = cabs1(H[l - 1, l - 1]) + cabs1(H[l, l])
            if s_ == 0.0:
                for i in range(hi + 1):
                    for j in range(hi + 1):
                        s_ += cabs(H[i, j])
            if cabs1(H[l, l - 1]) <= EPS * s_:
                H[l, l - 1] = 0.0
                break
            l -= 1
        if l == hi:
            hi -= 1
            its = 0
            continue
        if sweeps >= max_sweeps:
            return -1
        sweeps += 1
        its += 1
        if its % 10 == 0:
            mu = H[hi, hi] + 0.75 * fabs(creal(H[hi, hi - 1]))
        else:
            a = H[hi - 1, hi - 1]
            b = H[hi - 1, hi]
            cc = H[hi, hi - 1]
            d = H[hi, hi]
            half = 0.5 * (a - d)
            disc = csqrt(half * half + b * cc)
            r1 = d + half + disc
            r2 = d + half - disc
            mu = r1 if cabs(r1 - d) <= cabs(r2 - d) else r2
        x = H[l, l] - mu
        y = H[l + 1, l]
        for k in range(l, hi):
            if k > l:
                x = H[k, k - 1]
                y = H[k + 1, k - 1]
            _givens(x, y, &c, &s)
            j0 = k - 1 if k > l else k
            for j in range(j0, n):
                t0 = H[k, j]
                t1 = H[k + 1, j]
                H[k, j] = c * t0 + s * t1
                H[k + 1, j] = -conj(s) * t0 + c * t1
            if k > l:
                H[k + 1, k - 1] = 0.0
            i1 = (k + 2 if k + 2 < hi else hi) + 1
            for i in range(i1):
                t0 = H[i, k]
                t1 = H[i, k + 1]
                H[i, k] = c * t0 + conj(s) * t1
                H[i, k + 1] = -s * t0 + c * t1
            for i in range(n):
                t0 = Z[i, k]
                t1 = Z[i, k + 1]
                Z[i, k] = c * t0 + conj(s) * t1
                Z[i, k + 1] = -s * t0 + c * t1
    return sweeps


cdef void _tri_eigvecs(double complex[:, ::1] T, double complex[:, ::1] X) nogil:
    cdef Py_ssize_t n = T.shape[0], k, i, j
    cdef double small = 0.0
    cdef double complex lam, num, den
    for i in range(n):
        for j in range(n):
            small += cabs(T[i, j])
    small = EPS * small
    if small < TINY:
        small = TINY
    for k in range(n):
        lam = T[k, k]
        X[k, k] = 1.0
        i = k - 1
        while i >= 0:
            num = 0.0
            for j in range(i + 1, k + 1):
                num = num + T[i, j] * X[j, k]
            den = T[i, i] - lam
            if cabs(den) < small:
                den = small
            X[i, k] = -num / den
            i -= 1


def eig(A, max_sweeps=None):
    """Eigenvalues and unit-norm right eigenvectors; returns (w, V, sweeps)."""
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] H = np.array(A, dtype=np.complex128, order="C", copy=True)
    cdef Py_ssize_t n = H.shape[0]
    if n == 0:
        return np.zeros(0, complex), np.zeros((0, 0), complex), 0
    if max_sweeps is None:
        max_sweeps = 30 * n
    cdef int budget = max_sweeps
    d_arr = np.ones(n)
    Q_arr = np.eye(n, dtype=np.complex128)
    X_arr = np.zeros((n, n), dtype=np.complex128)
    work = np.zeros(n, dtype=np.complex128)
    cdef double complex[:, ::1] Hv = H
    cdef double complex[:, ::1] Qv = Q_arr
    cdef double complex[:, ::1] Xv = X_arr
    cdef double complex[::1] wv = work
    cdef double[::1] dv = d_arr
    cdef int sweeps
    with nogil:
        _balance(Hv, dv)
        _hessenberg(Hv, Qv, wv)
        sweeps = _schur(Hv, Qv, budget)
        if sweeps >= 0:
            _tri_eigvecs(Hv, Xv)
    if sweeps < 0:
        raise ConvergenceError(f"QR iteration did not converge in {max_sweeps} sweeps")
    V = (Q_arr @ X_arr) * d_arr[:, None]
    V /= np.linalg.norm(V, axis=0)
    return np.diag(H).copy(), V, sweeps
