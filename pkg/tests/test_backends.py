"""The Monte Carlo kernels must give identical numbers under the numba and
pure-numpy backends (same seed, same sample stream)."""

import json
import os
import subprocess
import sys

import numpy as np
import pytest

from featmatch import _mc

PROBE = """
import json
from featmatch import _mc
from featmatch.gda import Strategy, run_gda
from featmatch.instances import gen_random, non_transitive
from featmatch.prob import pr_prefers, pros_monte_carlo

inst = gen_random(3, 3, seed=99)
m, _ = run_gda(inst, Strategy.LOCV)
est = pros_monte_carlo(inst, m, samples=40_000, seed=5)
nt = non_transitive()
pair = pr_prefers(nt, 0, 0, 2, strict=True, samples=40_000, seed=5)
print(json.dumps({
    "backend": _mc.backend_name(),
    "value": est.value, "stderr": est.stderr, "pair": pair,
}))
"""


def _probe(backend: str) -> dict:
    env = dict(os.environ, FEATMATCH_BACKEND=backend)
    out = subprocess.run(
        [sys.executable, "-c", PROBE], env=env, capture_output=True, text=True, check=True
    )
    return json.loads(out.stdout)


def test_backends_agree_exactly():
    numpy_res = _probe("numpy")
    assert numpy_res["backend"] == "numpy"
    auto_res = _probe("auto")
    assert numpy_res["value"] == auto_res["value"]
    assert numpy_res["stderr"] == auto_res["stderr"]
    assert numpy_res["pair"] == auto_res["pair"]


def test_numba_backend_active_when_available():
    pytest.importorskip("numba")
    res = _probe("numba")
    assert res["backend"] == "numba"


def test_kernel_reference_values():
    scores = np.array([[1.0, 2.0, 0.5], [3.0, 1.0, 0.5], [0.5, 0.5, 0.5]])
    cand = np.array([1, 2])
    # rows where neither candidate beats college 0: rows 1 and 2
    assert _mc.noblock_fraction(scores, 0, cand) == pytest.approx(2 / 3)
    assert _mc.noblock_fraction(scores, 0, np.array([], dtype=np.int64)) == 1.0
    assert _mc.strict_fraction(scores, 0, 1) == pytest.approx(1 / 3)
    assert _mc.top_fraction(scores, 0, cand) == pytest.approx(2 / 3)
