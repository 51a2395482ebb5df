import os
import subprocess
import sys

import numpy as np
import pytest

from paraxial_bands import _kernels, assemble
from paraxial_bands._kernels import _qr_py

from conftest import mirror_model

KERNELS = _kernels.available()


def _check(w, V, A):
    r = np.linalg.norm(A @ V - V * w, axis=0) / np.linalg.norm(A)
    assert r.max() <= 1e-12
    assert np.allclose(np.linalg.norm(V, axis=0), 1.0, atol=1e-13)


@pytest.mark.parametrize("name", sorted(KERNELS))
def test_random_general_matrix(name, rng):
    A = rng.normal(size=(15, 15)) + 1j * rng.normal(size=(15, 15))
    w, V, sweeps = KERNELS[name](A, None)
    _check(w, V, A)
    ref = np.linalg.eigvals(A)
    assert np.allclose(np.sort_complex(w), np.sort_complex(ref), rtol=1e-11, atol=1e-12)
    assert sweeps > 0


@pytest.mark.parametrize("name", sorted(KERNELS))
def test_badly_scaled(name):
    # balancing should keep residuals small despite 1e8 row/column scales
    d = np.diag([1.0, 1e4, 1e-4, 1e8])
    B = np.array([[1, 2, 0, 1], [1, 3, 1, 0], [0, 1, 4, 1], [1, 0, 2, 5]], complex)
    A = d @ B @ np.linalg.inv(d)
    w, V, _ = KERNELS[name](A, None)
    assert np.allclose(np.sort_complex(w), np.sort_complex(np.linalg.eigvals(B)), rtol=1e-10)


@pytest.mark.parametrize("name", sorted(KERNELS))
def test_empty_and_scalar(name):
    w, V, s = KERNELS[name](np.zeros((0, 0), complex), None)
    assert w.shape == (0,) and s == 0
    w, V, _ = KERNELS[name](np.array([[3 - 1j]]), None)
    assert w[0] == 3 - 1j and abs(V[0, 0]) == 1


@pytest.mark.parametrize("name", sorted(KERNELS))
def test_sweep_limit_raises(name, rng):
    A = rng.normal(size=(10, 10)) + 0j
    with pytest.raises(_kernels.ConvergenceError):
        KERNELS[name](A, 1)


def test_compiled_matches_python(basis, path):
    if "compiled" not in KERNELS:
        pytest.skip("compiled kernel not built")
    m = mirror_model(np.log(0.999), 0.01 + 0.01j)
    H = assemble(m, basis, path[9]).entries
    wc, Vc, _ = KERNELS["compiled"](H, None)
    wp, Vp, _ = KERNELS["python"](H, None)
    # deflation order may differ; compare after sorting
    oc, op = np.lexsort((wc.imag, wc.real)), np.lexsort((wp.imag, wp.real))
    wc, Vc, wp, Vp = wc[oc], Vc[:, oc], wp[op], Vp[:, op]
    assert np.allclose(wc, wp, rtol=1e-12, atol=0)
    # same algorithm: eigenvectors agree up to a unit phase
    ph = np.einsum("ij,ij->j", Vp.conj(), Vc)
    assert np.allclose(np.abs(ph), 1.0, atol=1e-10)


def test_hessenberg_structure(rng):
    A = rng.normal(size=(7, 7)) + 1j * rng.normal(size=(7, 7))
    H, Q = _qr_py.hessenberg(A.copy())
    assert np.allclose(np.tril(H, -2), 0)
    assert np.allclose(Q @ H @ Q.conj().T, A, atol=1e-12)


def test_selection_default():
    assert _kernels.KERNEL in ("compiled", "python")
    assert _kernels.qr_eig is KERNELS[_kernels.KERNEL]


def test_pure_python_env_forces_fallback():
    env = dict(os.environ, PARAXIAL_BANDS_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c", "import paraxial_bands as p; print(p.KERNEL)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "python"


def test_benchmark_smoke():
    root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
    out = subprocess.run(
        [sys.executable, os.path.join(root, "benchmarks", "bench_kernels.py"), "--M", "1", "--repeat", "1"],
        capture_output=True, text=True, check=True,
    )
    assert "python [ms]" in out.stdout and "lapack [ms]" in out.stdout
