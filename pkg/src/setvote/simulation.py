"""Seeded Monte Carlo experiments for the merging rules.

Every replication gets its own generator, spawned from the master seed by
replication index, and results are reduced in index order. The report is
therefore bit-identical for any number of worker processes.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Dict, List, Mapping, Optional

import numpy as np
from scipy.special import ndtr, ndtri
from scipy.stats import binom

from .derandomize import hulc_buckets, hulc_interval, mom, running_median
from .intervals import Interval, IntervalUnion, WeightedFamily
from .pvalues import ruger, ruger_median, ruger_randomized
from .risk import LabelSetFamily, LossSpec, risk_merge_majority, risk_merge_weighted
from .sequential import SequentialMerger, merge_exchangeable, merge_permuted
from .vote import (
    binom_quantile,
    coverage_bounds,
    merge_independent,
    merge_majority,
    merge_randomized,
    merge_randomized_union,
    merge_tau,
)

__all__ = [
    "SCENARIOS",
    "ExperimentConfig",
    "ExperimentReport",
    "RuleSummary",
    "private_hoeffding_interval",
    "randomized_response",
    "run_experiment",
    "run_private_agents",
    "run_worstcase_dependence",
    "run_independent_sets",
    "run_multisplit_conformal",
    "run_momom",
    "run_hulc_mom",
    "run_lambda_sampling",
    "run_ruger_validity",
    "run_risk_control",
]

SCHEMA = "setvote/1"


# ---------------------------------------------------------------------------
# Local differential privacy building blocks


def _privacy_r(eps: float) -> float:
    if not eps > 0:
        raise ValueError(f"epsilon must be positive, got {eps}")
    return math.tanh(eps / 2.0)  # (e^eps - 1) / (e^eps + 1)


def randomized_response(raw, eps: float, seed=None) -> np.ndarray:
    """Privatize values in [0, 1] into bits with mean ``(1 - r)/2 + r x``.

    Each value is first rounded to a Bernoulli(x) bit, which is then kept with
    probability ``(1 + r)/2`` and flipped otherwise, ``r = tanh(eps/2)``.
    """
    x = np.asarray(raw, dtype=float).ravel()
    if np.any(np.isnan(x)) or np.any(x < 0) or np.any(x > 1):
        raise ValueError("raw values must lie in [0, 1]")
    r = _privacy_r(eps)
    rng = np.random.default_rng(seed)
    bits = rng.random(x.size) < x
    flip = rng.random(x.size) >= (1.0 + r) / 2.0
    return (bits ^ flip).astype(float)


def private_hoeffding_interval(privatized, eps: float, alpha: float) -> Interval:
    """Hoeffding interval for the mean of the raw data behind randomized-response bits.

    The centre debiases the bit average and the half-width
    ``sqrt(-log(alpha/2) / (2 n r^2))`` depends only on n, alpha and eps.
    """
    z = np.asarray(privatized, dtype=float).ravel()
    n = z.size
    if n < 1:
        raise ValueError("need at least one observation")
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    r = _privacy_r(eps)
    centre = (z.sum() - n * (1.0 - r) / 2.0) / (n * r)
    half = math.sqrt(-math.log(alpha / 2.0) / (2.0 * n * r * r))
    return Interval(centre - half, centre + half)


# ---------------------------------------------------------------------------
# Configuration and report


def _set_metrics(s: IntervalUnion, target: float) -> dict:
    return {
        "covered": float(s.contains(target)),
        "width": s.measure,
        "empty": float(s.is_empty),
        "multipart": float(s.n_parts > 1),
    }


def _agent_metrics(sets, target: float) -> dict:
    return {
        "covered": sum(s.contains(target) for s in sets) / len(sets),
        "width": math.fsum(s.width if isinstance(s, Interval) else s.measure for s in sets) / len(sets),
        "empty": 0.0,
        "multipart": 0.0,
    }


@dataclass(frozen=True)
class _Scenario:
    defaults: dict
    replicate: Callable
    validate: Callable
    finalize: Callable
    default_reps: int


SCENARIOS: Dict[str, _Scenario] = {}


def _coerce(name, value, default):
    if isinstance(default, bool):
        if isinstance(value, str):
            return value.strip().lower() in ("1", "true", "yes")
        return bool(value)
    if isinstance(default, int):
        v = float(value)
        if v != int(v):
            raise ValueError(f"parameter {name} must be an integer, got {value}")
        return int(v)
    if isinstance(default, float):
        return float(value)
    if isinstance(default, tuple):
        if isinstance(value, str):
            value = [x for x in value.replace(";", ",").split(",") if x.strip()]
        return tuple(float(x) for x in value)
    return str(value)


@dataclass(frozen=True)
class ExperimentConfig:
    """Scenario name, replication count, master seed and scenario parameters.

    Unspecified parameters take the scenario defaults; unknown ones are
    rejected. ``n_jobs`` only controls parallelism and never changes results.
    """

    scenario: str
    replications: Optional[int] = None
    master_seed: int = 0
    params: Mapping = field(default_factory=dict)
    n_jobs: int = 1

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ValueError(f"unknown scenario {self.scenario!r}; choose from {sorted(SCENARIOS)}")
        sc = SCENARIOS[self.scenario]
        reps = sc.default_reps if self.replications is None else self.replications
        if isinstance(reps, bool) or int(reps) != reps or reps < 1:
            raise ValueError(f"replications must be a positive integer, got {reps}")
        if int(self.n_jobs) < 1:
            raise ValueError("n_jobs must be at least 1")
        unknown = set(self.params) - set(sc.defaults)
        if unknown:
            raise ValueError(f"unknown parameters for {self.scenario}: {sorted(unknown)}")
        resolved = dict(sc.defaults)
        for k, v in self.params.items():
            resolved[k] = _coerce(k, v, sc.defaults[k])
        sc.validate(resolved)
        object.__setattr__(self, "replications", int(reps))
        object.__setattr__(self, "master_seed", int(self.master_seed))
        object.__setattr__(self, "params", resolved)
        object.__setattr__(self, "n_jobs", int(self.n_jobs))

    def to_json(self) -> dict:
        params = {k: list(v) if isinstance(v, tuple) else v for k, v in self.params.items()}
        return {
            "scenario": self.scenario,
            "replications": self.replications,
            "master_seed": self.master_seed,
            "params": params,
        }


@dataclass
class RuleSummary:
    """Monte Carlo mean and standard error of every metric tallied for one rule."""

    rule: str
    n: int
    means: dict
    ses: dict

    @property
    def coverage(self) -> float:
        return self.means["covered"]

    @property
    def coverage_se(self) -> float:
        return self.ses["covered"]

    @property
    def width(self) -> float:
        return self.means["width"]

    @property
    def width_se(self) -> float:
        return self.ses["width"]

    @property
    def frac_empty(self) -> float:
        return self.means.get("empty", float("nan"))

    @property
    def frac_multipart(self) -> float:
        return self.means.get("multipart", float("nan"))


_COLUMN_OF = {"covered": "coverage", "empty": "frac_empty", "multipart": "frac_multipart"}


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    rules: Dict[str, RuleSummary]
    extras: dict
    bound_checks: List[dict]
    table: List[dict]
    notes: List[str] = field(default_factory=list)

    def __getitem__(self, rule) -> RuleSummary:
        return self.rules[rule]

    @property
    def bounds_ok(self) -> bool:
        return all(c["ok"] for c in self.bound_checks)

    def to_json(self) -> dict:
        return _jsonable(
            {
                "schema": SCHEMA,
                "config": self.config.to_json(),
                "rules": {
                    r: {"n": s.n, "mean": s.means, "se": s.ses} for r, s in self.rules.items()
                },
                "extras": self.extras,
                "bound_checks": self.bound_checks,
                "notes": self.notes,
            }
        )

    def json_text(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=False) + "\n"

    def csv_text(self) -> str:
        """The table rounded to 4 decimals, one row per rule (or per curve point)."""
        if not self.table:
            return ""
        cols = list(self.table[0])
        for row in self.table[1:]:
            cols += [c for c in row if c not in cols]
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for row in self.table:
            w.writerow([_cell(row.get(c)) for c in cols])
        return buf.getvalue()

    def write(self, csv_path=None, json_path=None):
        if csv_path is not None:
            with open(csv_path, "w", encoding="utf-8", newline="") as f:
                f.write(self.csv_text())
        if json_path is not None:
            with open(json_path, "w", encoding="utf-8") as f:
                f.write(self.json_text())


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return "" if math.isnan(v) else f"{v:.4f}"
    return str(v)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            return None
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return obj


# ---------------------------------------------------------------------------
# Runner


def _replicate(args):
    name, params, seed = args
    return SCENARIOS[name].replicate(np.random.default_rng(seed), params)


def _mean_se(a: np.ndarray):
    mean = np.mean(a, axis=0)
    if a.shape[0] > 1:
        se = np.std(a, axis=0, ddof=1) / math.sqrt(a.shape[0])
    else:
        se = np.zeros_like(mean)
    return mean, se


def _reduce(results, n):
    rules = {}
    for rule in results[0][0]:
        means, ses = {}, {}
        for metric in results[0][0][rule]:
            m, s = _mean_se(np.array([r[0][rule][metric] for r in results], dtype=float))
            means[metric], ses[metric] = float(m), float(s)
        rules[rule] = RuleSummary(rule, n, means, ses)
    extras = {}
    for key in results[0][1]:
        m, s = _mean_se(np.array([r[1][key] for r in results], dtype=float))
        extras[key] = m.tolist() if np.ndim(m) else float(m)
        extras[key + "_se"] = s.tolist() if np.ndim(s) else float(s)
    return rules, extras


def _check(rule, metric, kind, bound, est, se) -> dict:
    if kind == "lower":
        ok = est >= bound - 3 * se
    else:
        ok = est <= bound + 3 * se
    return {
        "rule": rule,
        "metric": metric,
        "kind": kind,
        "bound": float(bound),
        "estimate": float(est),
        "se": float(se),
        "ok": bool(ok),
    }


def _coverage_checks(rules, bounds: dict) -> list:
    out = []
    for rule, bound in bounds.items():
        s = rules[rule]
        out.append(_check(rule, "covered", "lower", bound, s.coverage, s.coverage_se))
    return out


def _rule_table(rules) -> list:
    rows = []
    for r, s in rules.items():
        row = {"rule": r}
        for metric in s.means:
            col = _COLUMN_OF.get(metric, metric)
            row[col] = s.means[metric]
            if metric in ("covered", "width", "risk"):
                row[col + "_se"] = s.ses[metric]
        rows.append(row)
    return rows


def run_experiment(config: ExperimentConfig) -> ExperimentReport:
    """Run all replications of ``config`` and summarize them."""
    sc = SCENARIOS[config.scenario]
    seeds = np.random.SeedSequence(config.master_seed).spawn(config.replications)
    jobs = ((config.scenario, config.params, s) for s in seeds)
    if config.n_jobs > 1 and config.replications > 1:
        chunk = max(1, config.replications // (8 * config.n_jobs))
        with ProcessPoolExecutor(config.n_jobs) as ex:
            results = list(ex.map(_replicate, jobs, chunksize=chunk))
    else:
        results = [_replicate(j) for j in jobs]
    rules, extras = _reduce(results, config.replications)
    notes: list = []
    checks, table = sc.finalize(config.params, rules, extras, notes)
    if table is None:
        table = _rule_table(rules)
    for note in notes:
        warnings.warn(note)
    return ExperimentReport(config, rules, extras, checks, table, notes)


def _register(name, defaults, validate, finalize, default_reps):
    def deco(fn):
        SCENARIOS[name] = _Scenario(defaults, fn, validate, finalize, default_reps)
        return fn

    return deco


def _runner(name):
    def run(config: Optional[ExperimentConfig] = None, *, replications=None, master_seed=0, n_jobs=1, **params):
        if config is None:
            config = ExperimentConfig(name, replications, master_seed, params, n_jobs)
        elif config.scenario != name:
            raise ValueError(f"expected a {name} config, got {config.scenario}")
        return run_experiment(config)

    run.__name__ = "run_" + name.replace("-", "_")
    run.__doc__ = f"Run the {name} scenario (see ``SCENARIOS[{name!r}].defaults`` for parameters)."
    return run


def _require(cond, msg):
    if not cond:
        raise ValueError(msg)


def _check_alpha(a, name="alpha"):
    _require(0 < a < 1, f"{name} must lie in (0, 1), got {a}")


# ---------------------------------------------------------------------------
# Private agents


def _validate_private(p):
    _require(p["K"] >= 1 and p["n"] >= 1, "K and n must be positive")
    _require(p["eps"] > 0, "eps must be positive")
    _check_alpha(p["alpha"])
    _require(p["design"] in ("I", "II"), "design must be I or II")
    _require(0 <= p["p_share"] <= 1, "p_share must lie in [0, 1]")


def _private_raw(rng, p) -> list:
    K, n = p["K"], p["n"]
    if p["design"] == "I":
        # A common pool of n*K/2 points, n drawn for each agent.
        pool = rng.random(max(n, round(n * K / 2)))
        return [rng.choice(pool, n, replace=False) for _ in range(K)]
    m = round(p["p_share"] * n)
    raws = []
    for k in range(K):
        x = rng.random(n)
        if k and m:
            x[:m] = raws[-1][:m]
        raws.append(x)
    return raws


@_register(
    "private-agents",
    {"K": 10, "n": 100, "eps": 2.0, "alpha": 0.1, "design": "I", "p_share": 0.5},
    _validate_private,
    lambda p, rules, extras, notes: (_private_checks(p, rules), None),
    2000,
)
def _rep_private(rng, p):
    target = 0.5
    ivs = [
        private_hoeffding_interval(randomized_response(x, p["eps"], rng), p["eps"], p["alpha"])
        for x in _private_raw(rng, p)
    ]
    fam = WeightedFamily(tuple(ivs))
    u = float(rng.random())
    out = {
        "agent": _agent_metrics(ivs, target),
        "majority": _set_metrics(merge_majority(fam).merged, target),
        "randomized": _set_metrics(merge_randomized(fam, u=u).merged, target),
        "randomized-union": _set_metrics(merge_randomized_union(fam, u=u).merged, target),
        "permuted": _set_metrics(merge_permuted(fam, rng).merged, target),
    }
    return out, {}


def _private_checks(p, rules):
    K, a = p["K"], p["alpha"]
    bounds = {"agent": 1 - a}
    for r in ("majority", "randomized", "randomized-union", "permuted"):
        bounds[r] = coverage_bounds(K, a, r).lower
    return _coverage_checks(rules, bounds)


# ---------------------------------------------------------------------------
# Worst-case dependence


def _worstcase_design(K, alpha):
    half = math.ceil(K / 2)
    p = alpha / math.comb(K - 1, K // 2)
    n_cases = math.comb(K, half)
    return p, n_cases


def _validate_worstcase(p):
    K, a = p["K"], p["alpha"]
    _require(K >= 1 and K % 2 == 1, f"K must be odd, got {K}")
    _require(0 <= a < 1, f"alpha must lie in [0, 1), got {a}")
    prob, n_cases = _worstcase_design(K, a)
    _require(prob * n_cases <= 1, f"alpha={a} is too large for K={K}: case probabilities exceed 1")


@lru_cache(maxsize=None)
def _worstcase_subsets(K):
    return tuple(itertools.combinations(range(K), math.ceil(K / 2)))


@lru_cache(maxsize=4096)
def _worstcase_outcome(K, missing):
    hit, miss = Interval(-1.0, 1.0), Interval(2.0, 4.0)
    sets = tuple(miss if k in missing else hit for k in range(K))
    return _agent_metrics(sets, 0.0), _set_metrics(merge_majority(sets).merged, 0.0)


def _finalize_worstcase(p, rules, extras, notes):
    K, a = p["K"], p["alpha"]
    extras["agent_miscoverage"] = 1 - rules["agent"].coverage
    extras["majority_miscoverage"] = 1 - rules["majority"].coverage
    extras["majority_miscoverage_theory"] = a * K / math.ceil(K / 2)
    bounds = {"agent": 1 - a, "majority": coverage_bounds(K, a, "majority").lower}
    return _coverage_checks(rules, bounds), None


@_register("worst-case", {"K": 5, "alpha": 0.1}, _validate_worstcase, _finalize_worstcase, 100_000)
def _rep_worstcase(rng, p):
    """One draw from the dependence pattern that makes majority vote as bad as allowed.

    Each subset of ceil(K/2) agents misses the target jointly with probability
    ``alpha / C(K-1, floor(K/2))``; otherwise every agent covers it.
    """
    K = p["K"]
    prob, n_cases = _worstcase_design(K, p["alpha"])
    u = float(rng.random())
    j = int(u // prob) if prob > 0 else n_cases
    missing = _worstcase_subsets(K)[j] if j < n_cases else ()
    agent, majority = _worstcase_outcome(K, missing)
    return {"agent": agent, "majority": majority}, {}


# ---------------------------------------------------------------------------
# Independent sets


def _validate_independent(p):
    _require(p["K"] >= 1, "K must be positive")
    _check_alpha(p["alpha"])
    _require(p["sigma"] > 0, "sigma must be positive")


def _finalize_independent(p, rules, extras, notes):
    K, a = p["K"], p["alpha"]
    q = binom_quantile(K, a)
    extras["binomial_quantile"] = q
    extras["independent_coverage_exact"] = float(binom.sf(q, K, 1 - a))
    bounds = {
        "agent": 1 - a,
        "independent": coverage_bounds(K, a, "independent").lower,
        "majority": coverage_bounds(K, a, "majority").lower,
    }
    return _coverage_checks(rules, bounds), None


@_register(
    "independent-sets",
    {"K": 10, "alpha": 0.1, "sigma": 1.0},
    _validate_independent,
    _finalize_independent,
    100_000,
)
def _rep_independent(rng, p):
    K, a, sigma = p["K"], p["alpha"], p["sigma"]
    z = ndtri(1 - a / 2) * sigma
    centres = rng.normal(0.0, sigma, K)
    ivs = tuple(Interval(c - z, c + z) for c in centres)
    fam = WeightedFamily(ivs)
    return {
        "agent": _agent_metrics(ivs, 0.0),
        "independent": _set_metrics(merge_independent(fam, a).merged, 0.0),
        "majority": _set_metrics(merge_majority(fam).merged, 0.0),
    }, {}


# ---------------------------------------------------------------------------
# Multi-split conformal


def _validate_multisplit(p):
    _require(p["n"] >= 4 and p["n"] % 2 == 0, "n must be even and at least 4")
    _require(p["d"] >= 1 and p["d"] + 1 < p["n"] // 2, "need 1 <= d < n/2 - 1")
    _require(p["K"] >= 1, "K must be positive")
    _check_alpha(p["alpha"])
    _require(0 < p["tau"] < 1, "tau must lie in (0, 1)")
    _require(p["noise"] > 0, "noise must be positive")


def _split_conformal(X, y, x_new, level_alpha, rng) -> Interval:
    n = len(y)
    perm = rng.permutation(n)
    train, cal = perm[: n // 2], perm[n // 2 :]
    A = np.column_stack([np.ones(n), X])
    coef = np.linalg.lstsq(A[train], y[train], rcond=None)[0]
    resid = np.sort(np.abs(y[cal] - A[cal] @ coef))
    m = cal.size
    r = math.ceil((m + 1) * (1 - level_alpha))
    pred = float(np.concatenate([[1.0], x_new]) @ coef)
    if r > m:
        return Interval(-math.inf, math.inf)
    q = float(resid[r - 1])
    return Interval(pred - q, pred + q)


def _finalize_multisplit(p, rules, extras, notes):
    K, a, tau = p["K"], p["alpha"], p["tau"]
    lower = coverage_bounds(K, a * (1 - tau), "tau", tau=tau).lower
    bounds = {"agent": 1 - a * (1 - tau), "tau": lower, "exchangeable": lower}
    return _coverage_checks(rules, bounds), None


@_register(
    "multisplit-conformal",
    {"n": 200, "d": 5, "K": 20, "alpha": 0.1, "tau": 0.5, "noise": 1.0},
    _validate_multisplit,
    _finalize_multisplit,
    1000,
)
def _rep_multisplit(rng, p):
    n, d = p["n"], p["d"]
    beta = np.ones(d)
    X = rng.normal(size=(n, d))
    y = X @ beta + p["noise"] * rng.normal(size=n)
    x_new = rng.normal(size=d)
    y_new = float(x_new @ beta + p["noise"] * rng.normal())
    level = p["alpha"] * (1 - p["tau"])
    ivs = [_split_conformal(X, y, x_new, level, rng) for _ in range(p["K"])]
    cm = merge_tau(WeightedFamily(tuple(ivs)), p["tau"]).merged
    ce = merge_exchangeable(ivs, p["tau"]).merged
    extras = {"ce_subset_cm": float(ce.issubset(cm)), "ce_not_wider": float(ce.measure <= cm.measure)}
    return {
        "agent": _agent_metrics(ivs, y_new),
        "tau": _set_metrics(cm, y_new),
        "exchangeable": _set_metrics(ce, y_new),
    }, extras


# ---------------------------------------------------------------------------
# MoMoM stabilization


def _validate_momom(p):
    _require(1 <= p["B"] <= p["n"], "need 1 <= B <= n")
    _require(p["K"] >= 1, "K must be positive")
    _require(p["df"] > 2, "df must exceed 2 for a finite variance")
    _require(p["tol"] > 0, "tol must be positive")


def _finalize_momom(p, rules, extras, notes):
    K = p["K"]
    table = []
    for k in range(1, K + 1):
        table.append(
            {
                "k": k,
                "mean_abs_delta": extras["delta_curve"][k - 2] if k > 1 else None,
                "mean_abs_error": extras["error_curve"][k - 1],
            }
        )
    return [], table


@_register(
    "momom",
    {"n": 210, "B": 21, "K": 70, "df": 3.0, "tol": 0.25},
    _validate_momom,
    _finalize_momom,
    200,
)
def _rep_momom(rng, p):
    """t-distributed data (mean 0), K re-bucketed MoM estimates and their running median."""
    x = rng.standard_t(p["df"], p["n"])
    ests = [mom(x, p["B"], rng) for _ in range(p["K"])]
    path = np.asarray(running_median(ests))
    err = np.abs(path)
    extras = {
        "error_curve": err,
        "final_within_tol": float(err[-1] <= p["tol"]),
        "first_within_tol": float(err[0] <= p["tol"]),
    }
    if p["K"] > 1:
        extras["delta_curve"] = np.abs(np.diff(path))
    return {}, extras


# ---------------------------------------------------------------------------
# HulC over MoM


def _validate_hulc(p):
    _check_alpha(p["alpha"])
    B2 = hulc_buckets(p["alpha"])
    _require(p["K"] >= 1, "K must be positive")
    _require(p["df"] > 2, "df must exceed 2 for a finite variance")
    _require(1 <= p["B1"] <= p["n"] // B2, f"need 1 <= B1 <= n / {B2}")


def _finalize_hulc(p, rules, extras, notes):
    if p["B1"] % 2 == 0:
        notes.append("B1 is even: the median-of-means is not guaranteed median-unbiased")
    K, a = p["K"], p["alpha"]
    extras["B2"] = hulc_buckets(a)
    bounds = {
        "agent": 1 - a,
        "majority": coverage_bounds(K, a, "majority").lower,
        "exchangeable": coverage_bounds(K, a, "exchangeable").lower,
    }
    table = _rule_table(rules)
    return _coverage_checks(rules, bounds), table


@_register(
    "hulc-mom",
    {"n": 210, "B1": 7, "alpha": 0.05, "K": 20, "df": 3.0},
    _validate_hulc,
    _finalize_hulc,
    1000,
)
def _rep_hulc(rng, p):
    x = rng.standard_t(p["df"], p["n"])
    B1, K = p["B1"], p["K"]

    def estimator(z):
        return mom(z, B1, rng)

    merger = SequentialMerger()
    ivs = []
    ce_cov, cm_cov, ce_w, cm_w = (np.empty(K) for _ in range(4))
    monotone = True
    for k in range(K):
        ivs.append(hulc_interval(x, p["alpha"], rng, estimator))
        ce = merger.update(ivs[-1])
        cm = merge_majority(ivs).merged
        ce_cov[k], cm_cov[k] = ce.contains(0.0), cm.contains(0.0)
        ce_w[k], cm_w[k] = ce.measure, cm.measure
        if k and ce_w[k] > ce_w[k - 1]:
            monotone = False
    rules = {
        "agent": _agent_metrics(ivs, 0.0),
        "majority": _set_metrics(cm, 0.0),
        "exchangeable": _set_metrics(ce, 0.0),
    }
    extras = {
        "ce_coverage_by_k": ce_cov,
        "cm_coverage_by_k": cm_cov,
        "ce_width_by_k": ce_w,
        "cm_width_by_k": cm_w,
        "ce_width_nonincreasing": float(monotone),
    }
    return rules, extras


# ---------------------------------------------------------------------------
# Random tuning parameter


def _validate_lambda(p):
    _require(p["N"] >= 1 and p["n"] >= 1, "N and n must be positive")
    _check_alpha(p["alpha"])
    _require(0 < p["lambda_low"] <= p["lambda_high"] <= 1, "need 0 < lambda_low <= lambda_high <= 1")
    _require(p["sigma"] > 0, "sigma must be positive")


def _finalize_lambda(p, rules, extras, notes):
    a = p["alpha"]
    bounds = {"agent": 1 - a, "randomized": coverage_bounds(p["N"], a, "randomized").lower}
    return _coverage_checks(rules, bounds), None


@_register(
    "lambda-sampling",
    {"N": 10, "n": 100, "alpha": 0.1, "lambda_low": 0.2, "lambda_high": 1.0, "mu": 0.0, "sigma": 1.0},
    _validate_lambda,
    _finalize_lambda,
    2000,
)
def _rep_lambda(rng, p):
    """Gaussian-mean z-intervals that each use a random fraction lambda of the sample."""
    n, sigma = p["n"], p["sigma"]
    x = rng.normal(p["mu"], sigma, n)
    lams = rng.uniform(p["lambda_low"], p["lambda_high"], p["N"])
    z = ndtri(1 - p["alpha"] / 2)
    ivs = []
    for lam in lams:
        m = max(1, math.ceil(lam * n - 1e-12))
        c, h = float(np.mean(x[:m])), z * sigma / math.sqrt(m)
        ivs.append(Interval(c - h, c + h))
    merged = merge_randomized(WeightedFamily(tuple(ivs)), rng).merged
    return {"agent": _agent_metrics(ivs, p["mu"]), "randomized": _set_metrics(merged, p["mu"])}, {}


# ---------------------------------------------------------------------------
# Order-statistic p-value combination


def _validate_ruger(p):
    _require(p["K"] >= 1, "K must be positive")
    _require(0 <= p["rho"] < 1, "rho must lie in [0, 1)")
    _require(len(p["alphas"]) >= 1 and all(0 < a < 1 for a in p["alphas"]), "alphas must lie in (0, 1)")
    _require(p["k"] == 0 or 1 <= p["k"] <= p["K"], "k must be 0 (lower median index) or in [1, K]")


def _ruger_k(p):
    return p["k"] or (p["K"] + 1) // 2


def _finalize_ruger(p, rules, extras, notes):
    checks, table = [], []
    for a in p["alphas"]:
        key = f"reject_median_{a:g}"
        est, se = extras[key], extras[key + "_se"]
        checks.append(_check("median", "type_one_error", "upper", a, est, se))
        table.append(
            {
                "alpha": a,
                "median_rejection": est,
                "median_rejection_se": se,
                "ruger_rejection": extras[f"reject_ruger_{a:g}"],
                "randomized_rejection": extras[f"reject_randomized_{a:g}"],
            }
        )
    extras["k"] = _ruger_k(p)
    return checks, table


@_register(
    "ruger-validity",
    {"K": 10, "rho": 0.5, "alphas": (0.01, 0.05, 0.1), "k": 0},
    _validate_ruger,
    _finalize_ruger,
    100_000,
)
def _rep_ruger(rng, p):
    """Null p-values Phi(Z) with equicorrelated Gaussian Z (common factor)."""
    K, rho = p["K"], p["rho"]
    z = math.sqrt(rho) * rng.normal() + math.sqrt(1 - rho) * rng.normal(size=K)
    pv = ndtr(z)
    k = _ruger_k(p)
    med = ruger_median(pv)
    det = ruger(pv, k)
    rnd = ruger_randomized(pv, k, rng)
    extras = {"randomized_le_ruger": float(rnd <= det)}
    for a in p["alphas"]:
        extras[f"reject_median_{a:g}"] = float(med <= a)
        extras[f"reject_ruger_{a:g}"] = float(det <= a)
        extras[f"reject_randomized_{a:g}"] = float(rnd <= a)
    return {}, extras


# ---------------------------------------------------------------------------
# Risk control on a finite label space


def _risk_spec(p) -> LossSpec:
    L = p["n_labels"]
    return LossSpec(tuple(range(1, L + 1)), 1.0, tuple((8 + y) / 18 for y in range(1, L + 1)))


def _validate_risk(p):
    _require(1 <= p["n_labels"] <= 10, "n_labels must lie in [1, 10] for costs (8 + y)/18")
    _require(p["K"] >= 1, "K must be positive")
    _check_alpha(p["alpha"])
    _require(0 <= p["rho"] < 1, "rho must lie in [0, 1)")
    _require(0 <= p["extra_prob"] <= 1, "extra_prob must lie in [0, 1]")
    spec = _risk_spec(p)
    _require(p["alpha"] <= np.mean(spec.costs), "alpha exceeds the mean miss cost")


def _finalize_risk(p, rules, extras, notes):
    a = p["alpha"]
    checks = []
    for rule, bound in (("agent", a), ("majority", 2 * a), ("weighted", 2 * a)):
        s = rules[rule]
        checks.append(_check(rule, "risk", "upper", bound, s.means["risk"], s.ses["risk"]))
    return checks, None


@_register(
    "risk-control",
    {"K": 7, "n_labels": 10, "alpha": 0.1, "rho": 0.5, "extra_prob": 0.3},
    _validate_risk,
    _finalize_risk,
    10_000,
)
def _rep_risk(rng, p):
    """K label sets whose true-label misses are dependent through a Gaussian copula.

    The marginal miss probability is set so that each input's expected loss is
    exactly alpha; other labels join each set independently.
    """
    spec = _risk_spec(p)
    K, L = p["K"], p["n_labels"]
    q = p["alpha"] / float(np.mean(spec.costs))
    y = int(rng.integers(L))
    z = math.sqrt(p["rho"]) * rng.normal() + math.sqrt(1 - p["rho"]) * rng.normal(size=K)
    member = rng.random((K, L)) < p["extra_prob"]
    member[:, y] = ndtr(z) >= q
    fam = LabelSetFamily(member)
    cost = spec.costs[y]
    label = spec.labels[y]

    def metrics(labels):
        hit = label in labels
        return {
            "covered": float(hit),
            "width": float(len(labels)),
            "empty": float(not labels),
            "risk": 0.0 if hit else cost,
        }

    agent = {
        "covered": float(member[:, y].mean()),
        "width": float(member.sum(axis=1).mean()),
        "empty": float((~member.any(axis=1)).mean()),
        "risk": float(cost * (~member[:, y]).mean()),
    }
    maj = risk_merge_majority(fam, spec)
    wtd = risk_merge_weighted(fam, spec, rng)
    extras = {"majority_auto_included": float(bool(maj.auto_included))}
    return {"agent": agent, "majority": metrics(maj.labels), "weighted": metrics(wtd.labels)}, extras


run_private_agents = _runner("private-agents")
run_worstcase_dependence = _runner("worst-case")
run_independent_sets = _runner("independent-sets")
run_multisplit_conformal = _runner("multisplit-conformal")
run_momom = _runner("momom")
run_hulc_mom = _runner("hulc-mom")
run_lambda_sampling = _runner("lambda-sampling")
run_ruger_validity = _runner("ruger-validity")
run_risk_control = _runner("risk-control")
