"""Typical and nice trees, and the rewiring surgery that turns one into the other.

Rewiring T_{v,w} moves every edge at v except the one toward w over to w.
For a pair that is safe (both degrees moderately large, small combined
degree, same cluster) one of the two orientations never lowers lambda_1.
Repeating good rewirings on a typical tree keeps it typical and ends at a
nice tree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import HypothesisViolation, ValidationError
from .spectra import DEFAULT_TOL, eigenvalue_count_below, top_eigenvalues
from .tree_core import LabeledTree, check_vertex, cluster_labels, max_sphere, tree_path


@dataclass(frozen=True)
class Thresholds:
    """Degree thresholds of the typicality, niceness and safety conditions.

    ``from_n`` gives the values used for n-vertex trees (natural logs).
    Any field can be overridden, e.g. to exercise the procedures on small
    trees where the literal values leave nothing to test.
    """

    kappa: float                # low degree means deg < kappa
    max_degree_min: float       # N1: max degree >= this
    cluster_sum_max: float      # N2: per-cluster sum of non-low degrees <= this
    adjacent_high: float        # N3: no edge with both degrees >= this
    cluster_high_max: float     # N4: per-cluster count of non-low vertices < this
    pair_sum_max: float         # S2: deg v + deg w <= this

    @classmethod
    def from_n(cls, n: int, **overrides) -> "Thresholds":
        if n < 3:
            raise ValidationError("thresholds need n >= 3 so that log log n is defined")
        ln = math.log(n)
        lnln = math.log(ln)
        base = cls(kappa=ln ** 0.2, max_degree_min=0.99 * ln / lnln, cluster_sum_max=3 * ln,
                   adjacent_high=0.9 * ln / lnln, cluster_high_max=9 * lnln,
                   pair_sum_max=0.9 * ln / lnln)
        return replace(base, **overrides)


def _thresholds(tree: LabeledTree, thresholds: Thresholds | None) -> Thresholds:
    if tree.n < 3:
        raise ValidationError("typicality needs n >= 3")
    return thresholds or Thresholds.from_n(tree.n)


@dataclass(frozen=True)
class TypicalityReport:
    n1: bool
    n2: bool
    n3: bool
    n4: bool | None
    witnesses: dict
    thresholds: Thresholds

    @property
    def typical(self) -> bool:
        return self.n1 and self.n2 and self.n3

    @property
    def nice(self) -> bool:
        return self.typical and bool(self.n4)

    def as_dict(self) -> dict:
        return {"N1": self.n1, "N2": self.n2, "N3": self.n3, "N4": self.n4,
                "typical": self.typical, "nice": self.nice, "witnesses": self.witnesses}


def _cluster_census(tree: LabeledTree, th: Thresholds):
    labels = cluster_labels(tree, th.kappa)[1:]
    deg = np.asarray(tree.degrees[1:])
    big = deg >= th.kappa
    sums = np.bincount(labels, weights=np.where(big, deg, 0)).astype(np.int64)
    counts = np.bincount(labels, weights=big).astype(np.int64)
    return labels, sums, counts


def _report(tree: LabeledTree, th: Thresholds, with_n4: bool) -> TypicalityReport:
    wit: dict = {}
    n1 = tree.max_degree >= th.max_degree_min
    if not n1:
        wit["N1"] = {"max_degree": tree.max_degree, "required": th.max_degree_min}
    labels, sums, counts = _cluster_census(tree, th)
    worst = int(np.argmax(sums))
    n2 = bool(sums[worst] <= th.cluster_sum_max)
    if not n2:
        v = int(np.flatnonzero(labels == worst)[0]) + 1
        wit["N2"] = {"vertex": v, "cluster_degree_sum": int(sums[worst]), "cap": th.cluster_sum_max}
    deg = tree.degrees
    e = tree.edge_array()
    bad = np.flatnonzero((deg[e[:, 0]] >= th.adjacent_high) & (deg[e[:, 1]] >= th.adjacent_high))
    n3 = bad.size == 0
    if not n3:
        wit["N3"] = {"edge": tuple(int(x) for x in e[bad[0]])}
    n4 = None
    if with_n4:
        crowd = int(np.argmax(counts))
        n4 = bool(counts[crowd] < th.cluster_high_max)
        if not n4:
            v = int(np.flatnonzero(labels == crowd)[0]) + 1
            wit["N4"] = {"vertex": v, "non_low_count": int(counts[crowd]), "cap": th.cluster_high_max}
    return TypicalityReport(bool(n1), n2, bool(n3), n4, wit, th)


def is_typical(tree: LabeledTree, thresholds: Thresholds | None = None) -> TypicalityReport:
    return _report(tree, _thresholds(tree, thresholds), with_n4=False)


def is_nice(tree: LabeledTree, thresholds: Thresholds | None = None) -> TypicalityReport:
    return _report(tree, _thresholds(tree, thresholds), with_n4=True)


# rewiring

def rewire(tree: LabeledTree, v: int, w: int) -> LabeledTree:
    """T_{v,w}: each edge s-v with s off the v-w path becomes s-w."""
    check_vertex(tree, v)
    check_vertex(tree, w)
    if v == w:
        raise ValidationError("rewire needs two distinct vertices")
    u = tree_path(tree, v, w)[1]
    e = tree.edge_array().copy()
    at_v = ((e[:, 0] == v) & (e[:, 1] != u)) | ((e[:, 1] == v) & (e[:, 0] != u))
    e[at_v] = np.where(e[at_v] == v, w, e[at_v])
    return LabeledTree(tree.n, e)


@dataclass(frozen=True)
class RewirePair:
    v: int
    w: int
    status: str                  # unsafe | safe | good-as-(v,w) | good-as-(w,v)
    conditions: tuple[bool, bool, bool]
    lambda_before: float | None = None
    lambda_vw: float | None = None
    lambda_wv: float | None = None

    @property
    def safe(self) -> bool:
        return all(self.conditions)


def safety(tree: LabeledTree, v: int, w: int, thresholds: Thresholds | None = None,
           labels: np.ndarray | None = None) -> tuple[bool, bool, bool]:
    th = _thresholds(tree, thresholds)
    dv, dw = tree.degree(v), tree.degree(w)
    s1 = min(dv, dw) >= th.kappa
    s2 = dv + dw <= th.pair_sum_max
    if labels is None:
        labels = cluster_labels(tree, th.kappa)
    s3 = labels[v] == labels[w]
    return bool(s1), bool(s2), bool(s3)


def at_least_lambda(tree: LabeledTree, value: float) -> bool:
    """Certified check that lambda_1(tree) >= value, by one inertia count."""
    return eigenvalue_count_below(tree, value) < tree.n


def classify_rewire_pair(tree: LabeledTree, v: int, w: int, tol: float = DEFAULT_TOL,
                         thresholds: Thresholds | None = None,
                         lambda_before: float | None = None) -> RewirePair:
    check_vertex(tree, v)
    check_vertex(tree, w)
    if v == w:
        raise ValidationError("a rewiring pair needs two distinct vertices")
    cond = safety(tree, v, w, thresholds)
    if not all(cond):
        return RewirePair(v, w, "unsafe", cond)
    lam = lambda_before if lambda_before is not None else top_eigenvalues(tree, 1).lambda1
    lam_vw = top_eigenvalues(rewire(tree, v, w), 1).lambda1
    lam_wv = top_eigenvalues(rewire(tree, w, v), 1).lambda1
    if lam_vw >= lam - tol:
        status = "good-as-(v,w)"
    elif lam_wv >= lam - tol:
        status = "good-as-(w,v)"
    else:
        status = "safe"
    return RewirePair(v, w, status, cond, lam, lam_vw, lam_wv)


# typical -> nice

@dataclass(frozen=True)
class RewireStep:
    step: int
    v: int
    w: int
    lambda1: float
    leaves: int


@dataclass(frozen=True)
class NiceResult:
    tree: LabeledTree
    steps: tuple[RewireStep, ...]
    lambda_initial: float
    report: TypicalityReport

    @property
    def lambda_final(self) -> float:
        return self.steps[-1].lambda1 if self.steps else self.lambda_initial

    def log_rows(self) -> list[dict]:
        return [{"step": s.step, "v": s.v, "w": s.w, "lambda1": s.lambda1, "leaves": s.leaves}
                for s in self.steps]


def _safe_pairs(tree: LabeledTree, th: Thresholds):
    """Safe ordered pairs in lexicographic order."""
    labels = cluster_labels(tree, th.kappa)
    deg = tree.degrees
    cand = [v for v in range(1, tree.n + 1) if deg[v] >= th.kappa]
    for v in cand:
        for w in cand:
            if v != w and labels[v] == labels[w] and deg[v] + deg[w] <= th.pair_sum_max:
                yield v, w


def _check_refines(before: LabeledTree, after: LabeledTree, kappa: float):
    old = cluster_labels(before, kappa)
    new = cluster_labels(after, kappa)
    for lab in np.unique(new[1:]):
        if np.unique(old[1:][new[1:] == lab]).size != 1:
            raise AssertionError("a cluster of the rewired tree straddles two old clusters")


def make_nice(tree: LabeledTree, tol: float = DEFAULT_TOL, thresholds: Thresholds | None = None,
              debug: bool = False) -> NiceResult:
    """Apply the first good rewiring (lexicographic order) until the tree is
    nice or no good pair is left.

    Each step turns a non-leaf v into a leaf, so the loop ends after at
    most (number of non-leaves) steps. A nice input is returned unchanged.
    """
    if tree.n <= 10:
        raise ValidationError("make_nice needs n > 10")
    th = _thresholds(tree, thresholds)
    start = is_typical(tree, th)
    if not start.typical:
        raise HypothesisViolation(f"input tree is not typical: {start.witnesses}")
    lam = top_eigenvalues(tree, 1, tol).lambda1
    lam0 = lam
    delta = tree.max_degree
    cur = tree
    steps = []
    while not is_nice(cur, th).nice:
        chosen = None
        for v, w in _safe_pairs(cur, th):
            cand = rewire(cur, v, w)
            if at_least_lambda(cand, lam - tol):
                chosen = (v, w, cand)
                break
        if chosen is None:
            break
        v, w, nxt = chosen
        if nxt.num_leaves <= cur.num_leaves:
            raise AssertionError("rewiring did not add a leaf")
        if debug:
            _check_refines(cur, nxt, th.kappa)
            if not is_typical(nxt, th).typical or nxt.max_degree != delta:
                raise AssertionError("safe rewiring broke typicality or changed the max degree")
        cur = nxt
        lam = top_eigenvalues(cur, 1, tol).lambda1
        steps.append(RewireStep(len(steps) + 1, v, w, lam, cur.num_leaves))
    return NiceResult(cur, tuple(steps), lam0, is_nice(cur, th))


@dataclass(frozen=True)
class SecondNeighborhood:
    max_second: int
    max_degree: int
    ratio: float          # max_second / (Delta^{6/5} (ln Delta)^{1/5})


def second_neighborhood_check(tree: LabeledTree, thresholds: Thresholds | None = None,
                              require_typical: bool = True) -> SecondNeighborhood:
    if require_typical:
        rep = is_typical(tree, thresholds)
        if not rep.typical:
            raise HypothesisViolation(f"tree is not typical: {rep.witnesses}")
    d2 = max_sphere(tree, 2)
    delta = tree.max_degree
    scale = delta ** 1.2 * math.log(delta) ** 0.2 if delta > 1 else float("nan")
    return SecondNeighborhood(d2, delta, d2 / scale)
