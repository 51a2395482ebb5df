"""Pure-Python dense complex eigensolver (fallback for the compiled kernel).

Same algorithm, step for step, as ``_qr_c.pyx``: scaling balance, Householder
reduction to upper Hessenberg form, single-shift complex QR iteration with
Wilkinson shifts to Schur form, then back-substitution on the triangular
factor for the eigenvectors.
"""
import numpy as np

from .errors import ConvergenceError

EPS = np.finfo(float).eps
RADIX = 2.0


def _cabs1(z):
    return abs(z.real) + abs(z.imag)


def balance(A):
    """Diagonal similarity scaling (powers of 2).  Returns scaled copy and d."""
    A = np.array(A, dtype=complex)
    n = A.shape[0]
    d = np.ones(n)
    absA = np.abs(A.real) + np.abs(A.imag)
    done = False
    while not done:
        done = True
        for i in range(n):
            c = absA[:, i].sum() - absA[i, i]
            r = absA[i, :].sum() - absA[i, i]
            if c == 0.0 or r == 0.0:
                continue
            g = r / RADIX
            f = 1.0
            s = c + r
            while c < g:
                f *= RADIX
                c *= RADIX * RADIX
            g = r * RADIX
            while c >= g:
                f /= RADIX
                c /= RADIX * RADIX
            if (c + r) / f < 0.95 * s:
                done = False
                d[i] *= f
                A[i, :] /= f
                A[:, i] *= f
                absA[i, :] /= f
                absA[:, i] *= f
    return A, d


def hessenberg(A):
    """Householder reduction A = Q H Q^H.  Returns (H, Q)."""
    H = np.array(A, dtype=complex)
    n = H.shape[0]
    Q = np.eye(n, dtype=complex)
    for k in range(n - 2):
        x = H[k + 1 :, k].copy()
        xnorm = np.linalg.norm(x)
        if xnorm == 0.0:
            continue
        x0 = x[0]
        phase = x0 / abs(x0) if x0 != 0 else 1.0
        alpha = -phase * xnorm
        v = x
        v[0] -= alpha
        vnorm = np.linalg.norm(v)
        if vnorm == 0.0:
            continue
        v /= vnorm
        H[k + 1 :, k:] -= 2.0 * np.outer(v, v.conj() @ H[k + 1 :, k:])
        H[:, k + 1 :] -= 2.0 * np.outer(H[:, k + 1 :] @ v, v.conj())
        Q[:, k + 1 :] -= 2.0 * np.outer(Q[:, k + 1 :] @ v, v.conj())
        H[k + 1, k] = alpha
        H[k + 2 :, k] = 0.0
    return H, Q


def _givens(a, b):
    """c (real), s such that [[c, s], [-conj(s), c]] @ [a, b] = [r, 0]."""
    if b == 0:
        return 1.0, 0j
    if a == 0:
        return 0.0, np.conj(b) / abs(b)
    aa = abs(a)
    norm = np.hypot(aa, abs(b))
    alpha = a / aa
    return aa / norm, alpha * np.conj(b) / norm


def schur(H, Z, max_sweeps):
    """Reduce Hessenberg H to upper triangular T in place, accumulating Z.

    Returns the number of QR sweeps used.  Raises ConvergenceError when the
    budget ``max_sweeps`` is exhausted.
    """
    n = H.shape[0]
    sweeps = 0
    hi = n - 1
    its = 0
    while hi > 0:
        # look for a negligible subdiagonal entry
        l = hi
        while l > 0:
            s = _cabs1(H[l - 1, l - 1]) + _cabs1(H[l, l])
            if s == 0.0:
                s = np.abs(H[: hi + 1, : hi + 1]).sum()
            if _cabs1(H[l, l - 1]) <= EPS * s:
                H[l, l - 1] = 0.0
                break
            l -= 1
        if l == hi:
            hi -= 1
            its = 0
            continue
        if sweeps >= max_sweeps:
            raise ConvergenceError(f"QR iteration did not converge in {max_sweeps} sweeps")
        sweeps += 1
        its += 1
        if its % 10 == 0:
            mu = H[hi, hi] + 0.75 * abs(H[hi, hi - 1].real)
        else:
            a, b = H[hi - 1, hi - 1], H[hi - 1, hi]
            c, d = H[hi, hi - 1], H[hi, hi]
            half = 0.5 * (a - d)
            disc = np.sqrt(half * half + b * c)
            r1 = d + half + disc  # eigenvalues of the trailing 2x2: (a+d)/2 +- disc
            r2 = d + half - disc
            mu = r1 if abs(r1 - d) <= abs(r2 - d) else r2
        x = H[l, l] - mu
        y = H[l + 1, l]
        for k in range(l, hi):
            if k > l:
                x = H[k, k - 1]
                y = H[k + 1, k - 1]
            c, s = _givens(x, y)
            j0 = k - 1 if k > l else k
            rk = H[k, j0:].copy()
            rk1 = H[k + 1, j0:]
            H[k, j0:] = c * rk + s * rk1
            H[k + 1, j0:] = -np.conj(s) * rk + c * rk1
            if k > l:
                H[k + 1, k - 1] = 0.0
            i1 = min(k + 2, hi) + 1
            ck = H[:i1, k].copy()
            ck1 = H[:i1, k + 1]
            H[:i1, k] = c * ck + np.conj(s) * ck1
            H[:i1, k + 1] = -s * ck + c * ck1
            zk = Z[:, k].copy()
            zk1 = Z[:, k + 1]
            Z[:, k] = c * zk + np.conj(s) * zk1
            Z[:, k + 1] = -s * zk + c * zk1
    return sweeps


def triangular_eigenvectors(T):
    """Right eigenvectors of upper triangular T (columns, unnormalized)."""
    n = T.shape[0]
    X = np.zeros((n, n), dtype=complex)
    small = max(EPS * np.abs(T).sum(), np.finfo(float).tiny)
    for k in range(n):
        lam = T[k, k]
        X[k, k] = 1.0
        for i in range(k - 1, -1, -1):
            num = T[i, i + 1 : k + 1] @ X[i + 1 : k + 1, k]
            den = T[i, i] - lam
            if abs(den) < small:
                den = small
            X[i, k] = -num / den
    return X


def eig(A, max_sweeps=None):
    """Eigenvalues and unit-norm right eigenvectors of a dense complex matrix.

    Returns ``(w, V, sweeps)``.
    """
    A = np.asarray(A, dtype=complex)
    n = A.shape[0]
    if n == 0:
        return np.zeros(0, complex), np.zeros((0, 0), complex), 0
    if max_sweeps is None:
        max_sweeps = 30 * n
    B, d = balance(A)
    H, Q = hessenberg(B)
    sweeps = schur(H, Q, max_sweeps)
    X = triangular_eigenvectors(H)
    V = (Q @ X) * d[:, None]
    V /= np.linalg.norm(V, axis=0)
    return np.diag(H).copy(), V, sweeps
