"""Dense non-Hermitian eigendecomposition with biorthonormal normalization.

For a complex-symmetric H the left eigenvectors are the plain transposes of
the right ones, so the biorthonormality condition reads
sum_G C_a(G) C_b(G) = delta_ab with no complex conjugation.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels
from .hamiltonian import HamiltonianMatrix
from .reciprocal import KPoint

log = logging.getLogger(__name__)

__all__ = [
    "EigensolverError",
    "EigenPair",
    "EigenSet",
    "ResidualReport",
    "eigendecompose",
    "biorthonormalize",
    "verify_residuals",
    "degenerate_clusters",
]

DEGENERACY_TOL = 1e-12  # eV
DEFECT_TOL = 1e-6
BACKENDS = ("qr", "compiled", "python", "lapack")


class EigensolverError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class EigenPair:
    value: complex
    vector: np.ndarray
    self_product: complex
    residual: float
    k: KPoint | None = None
    index: int = 0

    @property
    def energy(self) -> float:
        return self.value.real

    @property
    def broadening(self) -> float:
        return abs(self.value.imag)


@dataclass(frozen=True, eq=False)
class EigenSet:
    values: np.ndarray
    vectors: np.ndarray  # columns
    residuals: np.ndarray
    matrix: np.ndarray
    k: KPoint | None = None
    defect_flags: tuple = ()
    biorthonormal: bool = False
    max_cross_product: float | None = None
    sweeps: int = 0

    def __len__(self):
        return len(self.values)

    @property
    def self_products(self) -> np.ndarray:
        return np.einsum("ij,ij->j", self.vectors, self.vectors)

    @property
    def pairs(self) -> list[EigenPair]:
        sp = self.self_products
        return [
            EigenPair(complex(self.values[i]), self.vectors[:, i], complex(sp[i]), float(self.residuals[i]), self.k, i)
            for i in range(len(self.values))
        ]

    def pair(self, i: int) -> EigenPair:
        return EigenPair(
            complex(self.values[i]),
            self.vectors[:, i],
            complex(self.vectors[:, i] @ self.vectors[:, i]),
            float(self.residuals[i]),
            self.k,
            i,
        )

    def cross_products(self) -> np.ndarray:
        return self.vectors.T @ self.vectors


def _residuals(H: np.ndarray, w: np.ndarray, V: np.ndarray) -> np.ndarray:
    nrm = np.linalg.norm(H)
    if nrm == 0.0:
        nrm = 1.0
    return np.linalg.norm(H @ V - V * w, axis=0) / nrm


def _where(k: KPoint | None) -> str:
    if k is None:
        return "unknown k-point"
    tag = f" [{k.label}]" if k.label else ""
    return f"k=({k.kx:.6g}, {k.ky:.6g}) 1/um{tag}"


def eigendecompose(H, backend: str = "qr", max_sweeps: int | None = None) -> EigenSet:
    """All eigenpairs of ``H``, sorted by ascending real part.

    ``backend``: ``"qr"`` uses the kernel selected at import (compiled when
    available), ``"compiled"``/``"python"`` force one kernel, ``"lapack"``
    delegates to numpy.
    """
    if isinstance(H, HamiltonianMatrix):
        A, k = H.entries, H.k
    else:
        A, k = np.asarray(H, dtype=complex), None
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError(f"matrix at {_where(k)} has non-finite entries")
    sweeps = 0
    if backend == "lapack":
        w, V = np.linalg.eig(A)
    else:
        if backend == "qr":
            fn = _kernels.qr_eig
        else:
            kernels = _kernels.available()
            if backend not in kernels:
                raise ValueError(f"unknown or unavailable backend {backend!r}; have {sorted(kernels) + ['qr', 'lapack']}")
            fn = kernels[backend]
        try:
            w, V, sweeps = fn(A, max_sweeps)
        except _kernels.ConvergenceError as exc:
            raise EigensolverError(f"eigensolver failed at {_where(k)}: {exc}") from exc
    order = np.lexsort((w.imag, w.real))
    w = w[order]
    V = V[:, order]
    return EigenSet(w, V, _residuals(A, w, V), A, k, sweeps=sweeps)


def degenerate_clusters(values, tol: float = DEGENERACY_TOL) -> list[list[int]]:
    """Groups of indices whose eigenvalues chain together within ``tol``."""
    values = np.asarray(values)
    n = len(values)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    close = np.abs(values[:, None] - values[None, :]) <= tol
    for i in range(n):
        for j in range(i + 1, n):
            if close[i, j]:
                parent[find(j)] = find(i)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return sorted(groups.values(), key=lambda g: g[0])


def _bilinear_gram(vectors: np.ndarray, tol: float):
    """Re-pair columns so that W^T W = I (bilinear form, no conjugation).

    Returns (W, n_good).  Columns beyond ``n_good`` span an isotropic
    (self-orthogonal) remainder and are returned unnormalized.
    """
    rest = [vectors[:, j] / np.linalg.norm(vectors[:, j]) for j in range(vectors.shape[1])]
    out = []
    combos = 0
    while rest:
        sp = np.array([r @ r for r in rest])
        j = int(np.argmax(np.abs(sp)))
        if abs(sp[j]) < tol:
            # combine the best-coupled pair; u^T u = 2 a^T b for u = a + b
            best, pair = 0.0, None
            for a in range(len(rest)):
                for b in range(a + 1, len(rest)):
                    x = abs(rest[a] @ rest[b])
                    if x > best:
                        best, pair = x, (a, b)
            combos += 1
            if pair is None or best < tol or combos > vectors.shape[1] ** 2:
                break
            a, b = pair
            u = rest[a] + rest[b]
            v = rest[a] - rest[b]
            rest[a] = u / np.linalg.norm(u)
            rest[b] = v / np.linalg.norm(v)
            continue
        u = rest.pop(j)
        u = u / np.sqrt(u @ u)
        rest = [r - (u @ r) * u for r in rest]
        rest = [r / np.linalg.norm(r) if np.linalg.norm(r) > 0 else r for r in rest]
        out.append(u)
    n_good = len(out)
    return np.column_stack(out + rest), n_good


def _symmetric_jacobi(A: np.ndarray, max_sweeps: int = 60):
    """Diagonalize complex-symmetric A by complex-orthogonal rotations.

    Returns (diag, Y) with Y^T Y = I and Y^T A Y diagonal, or None near an
    exceptional point where no such rotation exists.
    """
    A = 0.5 * (A + A.T)
    d = A.shape[0]
    Y = np.eye(d, dtype=complex)
    scale = np.abs(A).sum() or 1.0
    for _ in range(max_sweeps):
        off = np.abs(A - np.diag(np.diag(A))).sum()
        if off <= 1e-15 * scale:
            return np.diag(A).copy(), Y
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = A[p, q]
                if abs(apq) <= 1e-18 * scale:
                    continue
                tau = (A[q, q] - A[p, p]) / (2.0 * apq)
                r = np.sqrt(tau * tau + 1.0)
                den = tau + r if abs(tau + r) >= abs(tau - r) else tau - r
                t = 1.0 / den
                one_t2 = 1.0 + t * t
                if abs(one_t2) < 1e-8:
                    return None
                c = 1.0 / np.sqrt(one_t2)
                s = t * c
                J = np.eye(d, dtype=complex)
                J[p, p] = J[q, q] = c
                J[p, q] = s
                J[q, p] = -s
                A = J.T @ A @ J
                A[p, q] = A[q, p] = 0.0
                Y = Y @ J
    if np.abs(A - np.diag(np.diag(A))).sum() <= 1e-12 * scale:
        return np.diag(A).copy(), Y
    return None


def biorthonormalize(es: EigenSet, refine_tol: float | None = None, defect_tol: float = DEFECT_TOL) -> EigenSet:
    """Scale eigenvectors so that sum_G C_a(G) C_b(G) = delta_ab.

    Eigenvalues closer than ``refine_tol`` (default 1e-6 ||H||_F) are
    handled as a group: their span is re-paired by a bilinear Gram step and
    re-diagonalized with complex-orthogonal rotations, which fixes the
    cross products inside the group exactly.  Vectors whose self product is
    below ``defect_tol`` (near an exceptional point) are flagged and left
    unnormalized.  Cross products are measured afterwards, not assumed.
    """
    H = es.matrix
    w = es.values.copy()
    V = es.vectors / np.linalg.norm(es.vectors, axis=0)
    nrm = np.linalg.norm(H) or 1.0
    symmetric = np.abs(H - H.T).max() <= 1e-13 * nrm
    if refine_tol is None:
        refine_tol = 1e-6 * nrm
    flags = set()
    for group in degenerate_clusters(w, refine_tol):
        if len(group) == 1:
            j = group[0]
            sp = V[:, j] @ V[:, j]
            if abs(sp) < defect_tol:
                flags.add(j)
            else:
                V[:, j] /= np.sqrt(sp)
            continue
        W, n_good = _bilinear_gram(V[:, group], defect_tol)
        if n_good < len(group):
            flags.update(group[n_good:])
            log.warning("self-orthogonal eigenvector subspace at %s (near an exceptional point)", _where(es.k))
        if not symmetric or n_good == 0:
            V[:, group] = W
            continue
        Wg = W[:, :n_good]
        A = Wg.T @ H @ Wg
        res = _symmetric_jacobi(A)
        if res is None:
            flags.update(group)
            log.warning("no orthogonal diagonalization of cluster at %s; flagged", _where(es.k))
            V[:, group] = W
            continue
        vals, Y = res
        Vg = Wg @ Y
        order = np.lexsort((vals.imag, vals.real))
        V[:, group[:n_good]] = Vg[:, order]
        w[group[:n_good]] = vals[order]
        if n_good < len(group):
            V[:, group[n_good:]] = W[:, n_good:]
    order = np.lexsort((w.imag, w.real))
    w, V = w[order], V[:, order]
    inv = np.argsort(order)
    flags = tuple(sorted(int(inv[j]) for j in flags))
    P = V.T @ V
    good = np.setdiff1d(np.arange(len(w)), flags)
    Pg = P[np.ix_(good, good)]
    off = Pg - np.diag(np.diag(Pg))
    max_cross = float(np.abs(off).max()) if off.size else 0.0
    return replace(
        es,
        values=w,
        vectors=V,
        residuals=_residuals(H, w, V),
        defect_flags=flags,
        biorthonormal=True,
        max_cross_product=max_cross,
    )


@dataclass(frozen=True)
class ResidualReport:
    residuals: np.ndarray
    tol: float
    failures: tuple = field(default_factory=tuple)

    @property
    def passed(self) -> bool:
        return not self.failures

    @property
    def max_residual(self) -> float:
        return float(np.max(self.residuals)) if len(self.residuals) else 0.0


def verify_residuals(H, es: EigenSet, tol: float = 1e-10) -> ResidualReport:
    """Per-pair ||H v - lambda v|| / ||H||_F against ``tol``."""
    A = H.entries if isinstance(H, HamiltonianMatrix) else np.asarray(H, dtype=complex)
    r = _residuals(A, es.values, es.vectors)
    return ResidualReport(r, tol, tuple(int(i) for i in np.nonzero(r > tol)[0]))
