import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from parkguard import _kernels_py, kernels

native = pytest.importorskip("parkguard._kernels")


def _fields(seed, shape=(23, 31)):
    rng = np.random.default_rng(seed)
    ny, nx = shape
    y, x = np.mgrid[0:ny, 0:nx] * 0.1
    phi = np.sin(1.3 * x) * np.cos(0.7 * y) + 0.1 * rng.standard_normal(shape)
    v = 0.2 + rng.random(shape)
    return phi, v


@pytest.mark.parametrize("order", [1, 2])
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_hamiltonian_backends_agree(order, seed):
    phi, v = _fields(seed)
    a = native.godunov_hamiltonian_field(phi, v, 0.1, order)
    b = _kernels_py.godunov_hamiltonian_field(phi, v, 0.1, order)
    assert np.allclose(a, b, rtol=1e-12, atol=1e-12)


def test_hamiltonian_accepts_readonly():
    phi, v = _fields(3)
    phi.setflags(write=False)
    v.setflags(write=False)
    native.godunov_hamiltonian_field(phi, v, 0.1)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 40), st.integers(0, 2**31 - 1))
def test_segment_distance_matches_brute_force(n, seed):
    rng = np.random.default_rng(seed)
    segs = rng.uniform(-1, 1, size=(n, 4))
    segs[0, 2:] = segs[0, :2]  # a degenerate segment
    xs = np.linspace(-1.2, 1.2, 17)
    ys = np.linspace(-1.1, 1.1, 13)
    ref = _kernels_py.segment_distance_brute(xs, ys, segs)
    assert np.allclose(native.segment_distance(xs, ys, segs), ref, rtol=0, atol=1e-12)
    assert np.allclose(_kernels_py.segment_distance(xs, ys, segs, k=3), ref, rtol=0, atol=1e-12)
    assert np.allclose(kernels.segment_distance(xs, ys, segs), ref, rtol=0, atol=1e-12)


def test_empty_segments():
    xs = ys = np.linspace(0, 1, 3)
    assert np.all(np.isinf(_kernels_py.segment_distance(xs, ys, np.zeros((0, 4)))))


def test_backend_selected_at_import():
    assert kernels.BACKEND == "cython"
    env = dict(os.environ, PARKGUARD_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "from parkguard import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
