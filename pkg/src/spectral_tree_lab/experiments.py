"""Seeded Monte Carlo experiments with CSV and JSON output.

Replication r at size n always draws from ``SeededRng(seed).stream(n, r)``,
so results do not depend on the worker count or on scheduling.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .dyck_codes import bound_simple_lambda1
from .errors import HypothesisViolation, ValidationError
from .mh_walks import bound_lambda1_mh, builtin_code, classify, epsilon
from .sampling import SeededRng, a_star, absorption_times, median_pair, sample_uniform_tree, size_probability_exact
from .spectra import DEFAULT_TOL, top_eigenvalues
from .surgery import is_nice, is_typical, make_nice
from .tree_core import LabeledTree, neighborhood_profile

SCHEMA_VERSION = 1
DEFAULT_TAIL_L = 4.0


def k_of_n(n: int, beta: float) -> int:
    """ceil(exp((ln n)^beta))."""
    return math.ceil(math.exp(math.log(n) ** beta))


@dataclass(frozen=True)
class ExperimentConfig:
    n_grid: tuple[int, ...] = (300, 3000, 30000)
    reps: int = 200
    beta: float = 0.3
    seed: int = 1
    workers: int = 1
    tail_L: float = DEFAULT_TAIL_L
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        object.__setattr__(self, "n_grid", tuple(int(n) for n in self.n_grid))
        if not self.n_grid or min(self.n_grid) < 3:
            raise ValidationError("every n in the grid must be at least 3")
        if self.reps < 2:
            raise ValidationError("need at least 2 replications for standard errors")
        if not 0 < self.beta < 0.5:
            raise ValidationError("beta must lie in (0, 1/2)")
        if self.workers < 1:
            raise ValidationError("workers must be at least 1")
        if not self.tol > 0:
            raise ValidationError("tol must be positive")


def _map(fn, jobs, workers):
    if workers == 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs, chunksize=max(1, len(jobs) // (4 * workers))))


def _mean_se(x) -> tuple[float, float]:
    x = np.asarray(x, dtype=float)
    return float(x.mean()), float(x.std(ddof=1) / math.sqrt(x.size)) if x.size > 1 else float("nan")


def _to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    if rows:
        w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    return buf.getvalue()


# convergence

def _convergence_rep(job):
    seed, n, rep, k, tol = job
    tree = sample_uniform_tree(n, SeededRng(seed).stream(n, rep))
    res = top_eigenvalues(tree, min(k, tree.n), tol)
    return tree.max_degree, res.eigenvalues[0], res.eigenvalues[-1], max(res.error_bounds)


def tail_scale(delta: int, L: float) -> float:
    """L (ln^2 Delta / sqrt Delta)^{1/15}."""
    return L * (math.log(delta) ** 2 / math.sqrt(delta)) ** (1 / 15) if delta > 1 else 0.0


def convergence_rows(config: ExperimentConfig) -> list[dict]:
    rows = []
    for n in config.n_grid:
        k = k_of_n(n, config.beta)
        jobs = [(config.seed, n, r, k, config.tol) for r in range(config.reps)]
        out = _map(_convergence_rep, jobs, config.workers)
        deltas = np.array([o[0] for o in out])
        lam1 = np.array([o[1] for o in out])
        lamk = np.array([o[2] for o in out])
        a_hat = median_pair(deltas)[0]
        gap1, gap1_se = _mean_se(np.abs(lam1 - np.sqrt(deltas)))
        gapk, gapk_se = _mean_se(np.abs(lamk - math.sqrt(a_hat)))
        gap1a, gap1a_se = _mean_se(np.abs(lam1 - math.sqrt(a_hat)))
        scale = np.array([tail_scale(int(d), config.tail_L) for d in deltas])
        tail, tail_se = _mean_se(np.abs(lam1 - np.sqrt(deltas)) > scale)
        rows.append({
            "schema_version": SCHEMA_VERSION, "n": n, "reps": config.reps, "seed": config.seed,
            "beta": config.beta, "k": k,
            "mean_abs_l1_minus_sqrt_delta": gap1, "se_abs_l1_minus_sqrt_delta": gap1_se,
            "mean_abs_lk_minus_sqrt_a_hat": gapk, "se_abs_lk_minus_sqrt_a_hat": gapk_se,
            "mean_abs_l1_minus_sqrt_a_hat": gap1a, "se_abs_l1_minus_sqrt_a_hat": gap1a_se,
            "tail_L": config.tail_L, "tail_freq": tail, "se_tail_freq": tail_se,
            "a_hat": a_hat, "a_star": a_star(n), "mean_delta": float(deltas.mean()),
            "order_violations": int(np.count_nonzero(lamk > lam1)),
            "tol": config.tol, "max_error_bound": float(max(o[3] for o in out)),
        })
    return rows


def run_convergence(config: ExperimentConfig) -> str:
    return _to_csv(convergence_rows(config))


# typicality survey

def _survey_rep(job):
    seed, n, rep = job
    tree = sample_uniform_tree(n, SeededRng(seed).stream(n, rep))
    rep_ = is_nice(tree)
    delta = tree.max_degree
    deg = tree.degrees
    e = tree.edge_array()
    big = deg >= 0.95 * delta
    adjacent = bool(np.any(big[e[:, 0]] & big[e[:, 1]]))
    return (rep_.n1, rep_.n2, rep_.n3, bool(rep_.n4), rep_.typical, rep_.nice, adjacent,
            delta >= 2 * math.log(n))


SURVEY_FLAGS = ("N1", "N2", "N3", "N4", "typical", "nice", "adjacent_high", "delta_ge_2ln")


def survey_rows(config: ExperimentConfig) -> list[dict]:
    rows = []
    for n in config.n_grid:
        out = _map(_survey_rep, [(config.seed, n, r) for r in range(config.reps)], config.workers)
        arr = np.array(out, dtype=float)
        row = {"schema_version": SCHEMA_VERSION, "n": n, "reps": config.reps, "seed": config.seed}
        for i, name in enumerate(SURVEY_FLAGS):
            m, se = _mean_se(arr[:, i])
            row[f"freq_{name}"] = m
            row[f"se_{name}"] = se
        rows.append(row)
    return rows


def run_typicality_survey(config: ExperimentConfig) -> str:
    return _to_csv(survey_rows(config))


# bound report

def fitted_L(lam1: float, delta: int) -> float:
    """(lambda_1 - sqrt Delta) Delta^{1/30} / ln^{2/15} Delta."""
    if delta < 2:
        return float("nan")
    return (lam1 - math.sqrt(delta)) * delta ** (1 / 30) / math.log(delta) ** (2 / 15)


def bound_report(tree: LabeledTree, code: str = "analysis50", kappa: float | None = None,
                 preset: str = "degree", tol: float = DEFAULT_TOL, require_typical: bool = True) -> dict:
    """Measured lambda_1 against the degree-based bounds for one tree.

    With ``require_typical`` the typed bound is evaluated on the make_nice
    output, otherwise on the tree itself.
    """
    lam = top_eigenvalues(tree, 1, tol)
    delta = tree.max_degree
    prof = neighborhood_profile(tree, 3)
    d2, d3 = prof.maxima[2], prof.maxima[3]
    report = {
        "schema_version": SCHEMA_VERSION, "n": tree.n, "max_degree": delta,
        "lambda1": lam.lambda1, "lambda1_error_bound": lam.error_bounds[0],
        "sqrt_delta": math.sqrt(delta), "two_sqrt_delta_minus_1": 2 * math.sqrt(max(delta - 1, 0)),
        "delta2": d2, "delta3": d3,
        "simple_bound": bound_simple_lambda1(delta, d2, d3),
        "fitted_L": fitted_L(lam.lambda1, delta),
    }
    typ = is_typical(tree)
    report["typical"] = typ.typical
    report["typicality"] = typ.as_dict()
    target = tree
    if require_typical:
        if not typ.typical:
            raise HypothesisViolation(f"tree is not typical: {typ.witnesses}")
        nice = make_nice(tree, tol)
        target = nice.tree
        report["make_nice_steps"] = len(nice.steps)
        report["nice"] = nice.report.nice
    mh = classify(target, kappa=kappa, preset=preset)
    code_obj = builtin_code(code)
    eps = epsilon(code_obj, mh)
    report.update({
        "code": code, "kappa": mh.kappa, "preset": preset, "epsilon": eps.epsilon,
        "epsilon_per_word": list(eps.per_word),
        "epsilon_per_family": {str(k): v for k, v in eps.per_family(code_obj).items()},
        "word_deltas": list(eps.deltas),
    })
    pair = mh.adjacent_high_pair()
    if pair is None:
        b = bound_lambda1_mh(mh, code_obj, eps.epsilon)
        report["lambda1_bound_mh"] = b
        report["lambda1_bound_mh_over_sqrt_delta"] = b / math.sqrt(delta)
    else:
        report["lambda1_bound_mh"] = None
        report["lambda1_bound_mh_skipped"] = f"adjacent high-degree vertices {pair}"
    return report


def run_bound_report(n: int | None = None, tree: LabeledTree | None = None, code: str = "analysis50",
                     kappa: float | None = None, seed: int = 1, retry_cap: int = 20,
                     require_typical: bool = True, preset: str = "degree",
                     tol: float = DEFAULT_TOL) -> str:
    """JSON report for a given tree, or for a sampled one (resampled until typical)."""
    if tree is None:
        if n is None:
            raise ValidationError("give either a tree or a size n")
        rng = SeededRng(seed)
        for attempt in range(retry_cap):
            tree = sample_uniform_tree(n, rng.stream(n, attempt))
            if not require_typical or is_typical(tree).typical:
                break
        else:
            raise HypothesisViolation(f"no typical tree in {retry_cap} draws at n={n}")
    rep = bound_report(tree, code, kappa, preset, tol, require_typical)
    return json.dumps(rep, indent=2, sort_keys=True)


# size distribution

def _size_chunk(job):
    seed, idx, reps, n_max = job
    sigma = absorption_times(reps, n_max, SeededRng(seed).stream(0, idx))
    return np.bincount(np.minimum(sigma, n_max + 1), minlength=n_max + 2)


def size_distribution_rows(n_max: int, reps: int, seed: int, workers: int = 1,
                           chunk: int = 1 << 20) -> list[dict]:
    if reps < 10_000:
        raise ValidationError("need at least 10^4 draws")
    if n_max < 1:
        raise ValidationError("n_max must be at least 1")
    jobs = []
    for i, lo in enumerate(range(0, reps, chunk)):
        jobs.append((seed, i, min(chunk, reps - lo), n_max))
    hist = sum(_map(_size_chunk, jobs, workers))
    rows = []
    for n in range(1, n_max + 1):
        p = hist[n] / reps
        se = math.sqrt(p * (1 - p) / reps)
        norm = math.sqrt(2 * math.pi) * n ** 1.5
        rows.append({"schema_version": SCHEMA_VERSION, "n": n, "reps": reps, "seed": seed,
                     "p_hat": p, "se": se, "ratio": p * norm, "se_ratio": se * norm,
                     "p_exact": size_probability_exact(n)})
    return rows


def run_size_distribution(n_max: int, reps: int, seed: int, workers: int = 1) -> str:
    return _to_csv(size_distribution_rows(n_max, reps, seed, workers))
