"""Order-statistic combination of dependent p-values and its link to majority vote."""

from __future__ import annotations

import math

import numpy as np

from .intervals import Interval, IntervalUnion, WeightedFamily
from .vote import merge_majority

__all__ = [
    "check_pvalues",
    "ruger",
    "ruger_median",
    "ruger_randomized",
    "duality_check",
]


def check_pvalues(p) -> np.ndarray:
    p = np.asarray(p, dtype=float).ravel()
    if p.size == 0:
        raise ValueError("need at least one p-value")
    if np.any(np.isnan(p)) or np.any(p < 0) or np.any(p > 1):
        raise ValueError("p-values must lie in [0, 1]")
    return p


def _order_stat(p: np.ndarray, j: int) -> float:
    return float(np.partition(p, j - 1)[j - 1])


def _check_k(k, K: int) -> int:
    if isinstance(k, bool) or int(k) != k or not 1 <= k <= K:
        raise ValueError(f"k must be an integer in [1, {K}], got {k}")
    return int(k)


def ruger(p, k: int) -> float:
    """``min(1, (K/k) p_(k))``, valid under arbitrary dependence.

    ``k=1`` is Bonferroni and ``k=K`` is the largest p-value.
    """
    p = check_pvalues(p)
    K = p.size
    k = _check_k(k, K)
    return min(1.0, K / k * _order_stat(p, k))


def ruger_median(p) -> float:
    """Twice the lower median, ``min(1, 2 p_(ceil(K/2)))``."""
    p = check_pvalues(p)
    return min(1.0, 2.0 * _order_stat(p, (p.size + 1) // 2))


def ruger_randomized(p, k: int, seed=None, *, u=None) -> float:
    """``min(1, (K/k) p_(ceil(U k)))`` with ``U`` uniform on (0, 1].

    Never larger than :func:`ruger` with the same ``k``. ``u`` forces the draw.
    """
    p = check_pvalues(p)
    K = p.size
    k = _check_k(k, K)
    if u is None:
        u = 1.0 - float(np.random.default_rng(seed).random())
    elif not 0 < u <= 1:
        raise ValueError(f"u must lie in (0, 1], got {u}")
    j = max(1, min(k, math.ceil(u * k)))
    return min(1.0, K / k * _order_stat(p, j))


def duality_check(pvalues, alpha: float, probes=None) -> bool:
    """Check that majority vote over acceptance regions implies a large median p-value.

    Set ``k`` is the collection of probe points where ``p_k > alpha``. Every
    probe point kept by the majority vote over these sets must have lower
    median p-value above alpha.

    Parameters
    ----------
    pvalues : array-like, shape (n_probes, K)
    alpha : float
    probes : array-like, shape (n_probes,), optional
        Probe locations; defaults to ``0, 1, ..., n_probes - 1``.
    """
    P = np.asarray(pvalues, dtype=float)
    if P.ndim != 2 or P.size == 0:
        raise ValueError("pvalues must be a nonempty 2-d array")
    check_pvalues(P)
    n, K = P.shape
    s = np.arange(n, dtype=float) if probes is None else np.asarray(probes, dtype=float)
    if s.shape != (n,) or np.unique(s).size != n:
        raise ValueError("need one distinct probe location per row")
    accept = P > alpha
    sets = tuple(
        IntervalUnion.of(*(Interval(x, x) for x in s[accept[:, k]])) for k in range(K)
    )
    merged = merge_majority(WeightedFamily(sets)).merged
    med = np.sort(P, axis=1)[:, (K + 1) // 2 - 1]
    return all(med[i] > alpha for i in range(n) if merged.contains(s[i]))
