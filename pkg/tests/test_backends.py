from __future__ import annotations

import json
import os
import subprocess
import sys

import numpy as np
import pytest

from erange import kernels
from erange._accel import HAVE_NUMBA, backend

needs_numba = pytest.mark.skipif(not HAVE_NUMBA, reason="numba not installed")

PROBE = """
import json, numpy as np
from erange import SquareBarrier, PowerTail, SquareWell, scattering_length, bound_states, phase_shift_curve
from erange._accel import backend
k = np.geomspace(0.05, 5, 6)
print(json.dumps({
    "backend": backend(),
    "a": scattering_length(PowerTail(1.0, 1.0, 6.0)),
    "delta": phase_shift_curve(SquareWell(30.0, 1.0), 1, k, workers=1).delta.tolist(),
    "gamma": list(bound_states(SquareWell(5.0, 1.0), 0).gammas),
}))
"""


def probe(disable: bool) -> dict:
    env = dict(os.environ)
    env.pop("ERANGE_DISABLE_NUMBA", None)
    if disable:
        env["ERANGE_DISABLE_NUMBA"] = "1"
    proc = subprocess.run([sys.executable, "-c", PROBE], capture_output=True, text=True, env=env, check=True)
    return json.loads(proc.stdout)


@needs_numba
def test_end_to_end_parity():
    fast, slow = probe(False), probe(True)
    assert fast["backend"] == "numba" and slow["backend"] == "numpy"
    assert slow["a"] == pytest.approx(fast["a"], rel=1e-12)
    np.testing.assert_allclose(slow["delta"], fast["delta"], rtol=1e-11, atol=1e-14)
    np.testing.assert_allclose(slow["gamma"], fast["gamma"], rtol=1e-12)


@needs_numba
@pytest.mark.parametrize("n", [1, 7, 500])
def test_kernel_parity(n):
    rng = np.random.default_rng(n)
    h = rng.uniform(1e-3, 0.5, n)
    U = rng.uniform(-50.0, 50.0, (n, 3))
    E1, q1 = kernels.magnus_propagators_numpy(h, U)
    E2, q2 = kernels.magnus_propagators_numba(h, U)
    np.testing.assert_allclose(E1, E2, rtol=1e-13, atol=1e-15)
    np.testing.assert_allclose(q1, q2, rtol=1e-13, atol=1e-15)
    for backward in (False, True):
        y1, L1 = kernels.sweep_numpy(E1, q1, np.array([1e-8, 1.0]), backward)
        y2, L2 = kernels.sweep_numba(E1, q1, np.array([1e-8, 1.0]), backward)
        np.testing.assert_allclose(y1, y2, rtol=1e-13)
        np.testing.assert_allclose(L1, L2, rtol=1e-13, atol=1e-13)
    ratio = np.exp(-rng.uniform(0, 1, n))
    np.testing.assert_allclose(kernels.rescaled_cumsum_numpy(h, ratio),
                               kernels.rescaled_cumsum_numba(h, ratio), rtol=1e-13)


def test_propagators_are_unimodular():
    rng = np.random.default_rng(1)
    h = rng.uniform(1e-3, 0.5, 200)
    U = rng.uniform(-200.0, 200.0, (200, 3))
    E, q = kernels.magnus_propagators(h, U)
    det = E[:, 0, 0] * E[:, 1, 1] - E[:, 0, 1] * E[:, 1, 0]
    # stored propagators are scaled by exp(-q); the determinant itself cancels
    # terms of size |E00 E11|, so measure the error against that
    size = np.abs(E[:, 0, 0] * E[:, 1, 1]) + np.abs(E[:, 0, 1] * E[:, 1, 0])
    assert np.all(np.abs(det - np.exp(-2 * q)) <= 1e-13 * size)


def test_backend_name():
    assert backend() in {"numba", "numpy"}
