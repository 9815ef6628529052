"""Top adjacency eigenvalues of trees with certified error bounds.

Values come from Lanczos (ARPACK) for larger trees and from bisection on
exact inertia counts otherwise. Every reported value is then certified by
counting eigenvalues on both sides of a small interval around it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from . import _kernels
from .errors import CertificationError, ValidationError
from .tree_core import LabeledTree, check_vertex

DEFAULT_TOL = 1e-9
TIE_NUDGE = 1e-12
DENSE_LIMIT = 512
LANCZOS_MIN_N = 64
LANCZOS_START_SEED = 20240917


@dataclass(frozen=True)
class Inertia:
    below: int
    equal: int
    above: int


@dataclass(frozen=True)
class SpectralResult:
    eigenvalues: tuple[float, ...]
    error_bounds: tuple[float, ...]
    diagnostics: dict = field(default_factory=dict)

    def __getitem__(self, i):
        return self.eigenvalues[i]

    @property
    def lambda1(self) -> float:
        return self.eigenvalues[0]


def _elimination_order(tree: LabeledTree):
    cache = tree.__dict__.get("_elim")
    if cache is None:
        order, parent, _ = tree.bfs(1)
        cache = (order, parent)
        tree.__dict__["_elim"] = cache
    return cache


def inertia(tree: LabeledTree, x: float) -> Inertia:
    """Exact inertia of A - xI from the tree elimination recurrence."""
    order, parent = _elimination_order(tree)
    neg, zero = _kernels.inertia(order, parent, float(x))
    return Inertia(int(neg), int(zero), tree.n - int(neg) - int(zero))


def eigenvalue_count_below(tree: LabeledTree, x: float) -> int:
    """Number of adjacency eigenvalues strictly less than x."""
    return inertia(tree, x).below


def count_bracket(tree: LabeledTree, x: float, nudge: float = TIE_NUDGE) -> tuple[int, int]:
    """Counts below x - nudge and below x + nudge; they differ iff x is (nearly) an eigenvalue."""
    return eigenvalue_count_below(tree, x - nudge), eigenvalue_count_below(tree, x + nudge)


def dense_spectrum(tree: LabeledTree) -> np.ndarray:
    """All eigenvalues in descending order by a dense solve (oracle, n <= 512)."""
    if tree.n > DENSE_LIMIT:
        raise ValidationError(f"dense oracle limited to n <= {DENSE_LIMIT}")
    return np.linalg.eigvalsh(tree.csr.toarray())[::-1]


def _certify(tree, index, value, widths):
    """Smallest width w in ``widths`` with lambda_index in [value - w, value + w]."""
    n = tree.n
    for w in widths:
        at_least_lo = n - eigenvalue_count_below(tree, value - w)
        at_least_hi = n - eigenvalue_count_below(tree, value + w)
        if at_least_lo >= index and at_least_hi <= index - 1:
            return w
    return None


def _bisect(tree, index, tol, max_iter=200):
    order, parent = _elimination_order(tree)
    r = 2.0 * math.sqrt(max(tree.max_degree, 1)) + 1.0
    lo, hi, it = _kernels.bisect_descending(order, parent, index, -r, r, tol, max_iter)
    return 0.5 * (lo + hi), 0.5 * (hi - lo), it


def top_eigenvalues(tree: LabeledTree, k: int = 1, tol: float = DEFAULT_TOL, *,
                    method: str = "auto", max_iter: int | None = None) -> SpectralResult:
    """The k largest adjacency eigenvalues, each certified to within tol.

    method is "lanczos", "bisection" or "auto". Lanczos values failing
    certification are recomputed by bisection and listed in the diagnostics.
    ARPACK non-convergence raises CertificationError.
    """
    n = tree.n
    if not 1 <= k <= n:
        raise ValidationError(f"k must lie in 1..{n}")
    if not tol > 0:
        raise ValidationError("tol must be positive")
    if method == "auto":
        method = "lanczos" if n > LANCZOS_MIN_N and k < n // 4 else "bisection"
    diag = {"method": method, "refined": []}
    widths = sorted({min(TIE_NUDGE * 10, tol), tol})

    if method == "lanczos":
        if k >= n - 1:
            raise ValidationError("Lanczos needs k < n - 1")
        ncv = min(n, max(2 * k + 1, 24))
        # fixed start vector: ARPACK's own is process dependent
        v0 = np.random.default_rng(LANCZOS_START_SEED).standard_normal(n)
        try:
            vals = eigsh(tree.csr, k=k, which="LA", tol=0, ncv=ncv, v0=v0,
                         maxiter=max_iter or 50 * n, return_eigenvectors=False)
        except ArpackNoConvergence as exc:
            raise CertificationError(f"Lanczos did not converge: {exc}") from None
        vals = np.sort(vals)[::-1]
    elif method == "bisection":
        vals = None
    else:
        raise ValidationError(f"unknown method {method!r}")

    out, bounds = [], []
    for i in range(1, k + 1):
        value = None
        if vals is not None:
            value = float(vals[i - 1])
            w = _certify(tree, i, value, widths)
            if w is None:
                diag["refined"].append(i)
                value = None
        if value is None:
            value, half, _ = _bisect(tree, i, min(tol, 1e-12))
            w = _certify(tree, i, value, widths)
            if w is None:
                if half <= tol:
                    w = tol
                else:
                    raise CertificationError(f"could not certify eigenvalue {i} to {tol}")
        out.append(value)
        bounds.append(w)
    return SpectralResult(tuple(out), tuple(bounds), diag)


def lambda1(tree: LabeledTree, tol: float = DEFAULT_TOL) -> float:
    return top_eigenvalues(tree, 1, tol).eigenvalues[0]


@dataclass(frozen=True)
class WitnessVector:
    host: int
    entries: dict

    def rayleigh_quotient(self, tree: LabeledTree) -> float:
        num = 0.0
        for u, xu in self.entries.items():
            for w in tree.neighbors(u):
                num += xu * self.entries.get(int(w), 0.0)
        den = sum(x * x for x in self.entries.values())
        return num / den


def sqrt_delta_witness(tree: LabeledTree, v: int) -> WitnessVector:
    """x_v = sqrt(deg v), 1 on the neighbours of v; quotient sqrt(deg v)."""
    check_vertex(tree, v)
    entries = {int(v): math.sqrt(tree.degree(v))}
    for w in tree.neighbors(v):
        entries[int(w)] = 1.0
    return WitnessVector(int(v), entries)


def degree_order(tree: LabeledTree) -> list[int]:
    """Vertices by decreasing degree, ties by increasing id."""
    ids = np.arange(1, tree.n + 1)
    return [int(v) for v in ids[np.lexsort((ids, -tree.degrees[1:]))]]


@dataclass(frozen=True)
class LowerBound:
    value: float
    independent_set: tuple[int, ...]
    witnesses: tuple[WitnessVector, ...]


def lambda_k_lower_bound(tree: LabeledTree, k: int, root: int = 1,
                         with_witnesses: bool = False) -> float | LowerBound:
    """sqrt(d_{2k} - 1), d_{2k} the 2k-th largest degree.

    Certain for k = 1. For larger k the witness stars may be adjacent, and
    the value can then exceed lambda_k (e.g. the path on 84 vertices, k = 29).

    With ``with_witnesses`` also returns k vectors supported on disjoint
    stars v_i + children(v_i), with v_i drawn from one side of the
    bipartition.
    """
    if not 1 <= k <= tree.n / 2:
        raise ValidationError("k must satisfy 1 <= k <= n/2")
    check_vertex(tree, root)
    order = degree_order(tree)
    d2k = tree.degree(order[2 * k - 1])
    value = math.sqrt(max(d2k - 1, 0))
    if not with_witnesses:
        return value
    _, parent, depth = tree.bfs(root)
    top = order[:2 * k]
    side = [v for v in top if depth[v] % 2 == 0]
    other = [v for v in top if depth[v] % 2 == 1]
    chosen = (side if len(side) >= len(other) else other)[:k]
    witnesses = []
    for v in chosen:
        kids = [int(w) for w in tree.neighbors(v) if parent[w] == v]
        entries = {v: math.sqrt(len(kids))}
        entries.update({c: 1.0 for c in kids})
        witnesses.append(WitnessVector(v, entries))
    return LowerBound(value, tuple(chosen), tuple(witnesses))
