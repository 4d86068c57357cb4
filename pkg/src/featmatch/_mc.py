"""Hot Monte Carlo kernels: numba-jitted with a pure-numpy fallback.

Backend selection via the FEATMATCH_BACKEND environment variable:
  "auto"  (default) use numba when importable, else numpy
  "numba" require numba, raise if unavailable
  "numpy" force the vectorized numpy path

All kernels take float64 arrays of per-sample weighted scores with shape
(samples, colleges) and return plain floats in [0, 1].
"""

import os

import numpy as np

_REQUESTED = os.environ.get("FEATMATCH_BACKEND", "auto").lower()

try:
    from numba import njit

    _HAS_NUMBA = True
except ImportError:
    _HAS_NUMBA = False
    if _REQUESTED == "numba":
        raise ImportError("FEATMATCH_BACKEND=numba but numba is not installed")

if _REQUESTED not in ("auto", "numba", "numpy"):
    raise ValueError(f"FEATMATCH_BACKEND must be auto|numba|numpy, got {_REQUESTED!r}")

_USE_NUMBA = _HAS_NUMBA and _REQUESTED != "numpy"


# -- numpy reference implementations ----------------------------------------


def _noblock_fraction_np(scores, match, cand):
    # no block <=> every candidate score <= matched score, per sample
    blocked = (scores[:, cand] > scores[:, match][:, None]).any(axis=1)
    return 1.0 - blocked.mean()


def _strict_fraction_np(scores, i, j):
    return float((scores[:, i] > scores[:, j]).mean())


def _top_fraction_np(scores, c, pool):
    best = (scores[:, c][:, None] >= scores[:, pool]).all(axis=1)
    return float(best.mean())


# -- numba implementations ---------------------------------------------------

if _USE_NUMBA:

    @njit(cache=True)
    def _noblock_fraction_nb(scores, match, cand):  # pragma: no cover - jitted
        k = scores.shape[0]
        good = 0
        for t in range(k):
            sm = scores[t, match]
            ok = True
            for idx in range(cand.shape[0]):
                if scores[t, cand[idx]] > sm:
                    ok = False
                    break
            if ok:
                good += 1
        return good / k

    @njit(cache=True)
    def _strict_fraction_nb(scores, i, j):  # pragma: no cover - jitted
        k = scores.shape[0]
        hits = 0
        for t in range(k):
            if scores[t, i] > scores[t, j]:
                hits += 1
        return hits / k

    @njit(cache=True)
    def _top_fraction_nb(scores, c, pool):  # pragma: no cover - jitted
        k = scores.shape[0]
        hits = 0
        for t in range(k):
            sc = scores[t, c]
            ok = True
            for idx in range(pool.shape[0]):
                if sc < scores[t, pool[idx]]:
                    ok = False
                    break
            if ok:
                hits += 1
        return hits / k


def backend_name() -> str:
    return "numba" if _USE_NUMBA else "numpy"


def noblock_fraction(scores: np.ndarray, match: int, cand: np.ndarray) -> float:
    """Fraction of samples where no candidate college strictly beats the match."""
    if cand.size == 0:
        return 1.0
    if _USE_NUMBA:
        return float(_noblock_fraction_nb(scores, match, cand))
    return float(_noblock_fraction_np(scores, match, cand))


def strict_fraction(scores: np.ndarray, i: int, j: int) -> float:
    """Fraction of samples where college i scores strictly above college j."""
    if _USE_NUMBA:
        return float(_strict_fraction_nb(scores, i, j))
    return _strict_fraction_np(scores, i, j)


def top_fraction(scores: np.ndarray, c: int, pool: np.ndarray) -> float:
    """Fraction of samples where college c weakly beats every pool member."""
    if pool.size == 0:
        return 1.0
    if _USE_NUMBA:
        return float(_top_fraction_nb(scores, c, pool))
    return _top_fraction_np(scores, c, pool)
