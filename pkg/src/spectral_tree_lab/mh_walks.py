"""Typed walks on trees with low, moderate and high degree vertices.

Vertices are typed l (low), m (moderate) or h (high). A backtracking step
is a zigzag x y x or x y z y x that leaves an m/h vertex x upward through
low vertices. Walks without backtracking steps are the (M,H)-walks counted
by typed prefix codes; every closed walk reduces to one by deleting its
backtracking steps.
"""

from __future__ import annotations

import itertools
import math
import re
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .dyck_codes import (BoundValue, CodeProfile, CodeValidation, PartitionedPath, _EdgeDP,
                         _explore_code, _Trie, enumerate_walks, meander_tree, partition_path)
from .errors import HypothesisViolation, MalformedCodeError, ValidationError
from .tree_core import LabeledTree, Walk, check_vertex, check_walk, distances_from, max_sphere

TYPES = "lmh"
LOW, MODERATE, HIGH = 0, 1, 2
HIGH_FRAC = 0.95
E20_LOG = 20.0


def default_kappa(n: int) -> float:
    return math.log(n) ** 0.2 if n > 1 else 0.0


# classification

@dataclass(frozen=True, eq=False)
class MHTree:
    tree: LabeledTree
    types: np.ndarray          # per vertex, LOW / MODERATE / HIGH; slot 0 unused
    kappa: float
    high_frac: float
    preset: str

    @property
    def high(self) -> frozenset[int]:
        return frozenset(int(v) for v in np.flatnonzero(self.types == HIGH))

    @property
    def moderate(self) -> frozenset[int]:
        return frozenset(int(v) for v in np.flatnonzero(self.types == MODERATE))

    def type_of(self, v: int) -> str:
        return TYPES[self.types[v]]

    @cached_property
    def masks(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        out = []
        for t in range(3):
            m = (self.types == t).astype(np.int64)
            m[0] = 0
            out.append(m)
        return tuple(out)

    @cached_property
    def anchor(self) -> np.ndarray:
        return self.types != LOW

    def adjacent_high_pair(self) -> tuple[int, int] | None:
        """An edge whose ends both have degree >= high_frac * max degree, if any."""
        deg = self.tree.degrees
        big = deg >= self.high_frac * self.tree.max_degree
        big[0] = False
        for u, v in self.tree.edges():
            if big[u] and big[v]:
                return (u, v)
        return None


def classify(tree: LabeledTree, kappa: float | None = None, high_frac: float = HIGH_FRAC,
             preset: str = "degree") -> MHTree:
    """Type vertices by degree.

    preset "degree": h when deg >= high_frac * max degree and deg >= kappa,
    m when kappa <= deg below that, l otherwise. preset "cluster": h when
    deg >= kappa, no m vertices. kappa defaults to (ln n)^{1/5}.
    """
    if kappa is None:
        kappa = default_kappa(tree.n)
    if not kappa > 0:
        raise ValidationError("kappa must be positive")
    if not 0 < high_frac <= 1:
        raise ValidationError("high_frac must lie in (0, 1]")
    deg = np.asarray(tree.degrees)
    types = np.zeros(tree.n + 1, dtype=np.int8)
    if preset == "degree":
        high = (deg >= high_frac * tree.max_degree) & (deg >= kappa)
        types[deg >= kappa] = MODERATE
        types[high] = HIGH
    elif preset == "cluster":
        types[deg >= kappa] = HIGH
    else:
        raise ValidationError(f"unknown preset {preset!r}; use 'degree' or 'cluster'")
    types[0] = LOW
    return MHTree(tree, types, float(kappa), float(high_frac), preset)


# typed meanders

def _type_char(t) -> str:
    if isinstance(t, (int, np.integer)):
        return TYPES[int(t)]
    t = {"ℓ": "l"}.get(t, t)
    if t not in TYPES:
        raise ValidationError(f"unknown vertex type {t!r}")
    return t


def _pattern_at(values, types, i, anchor_of) -> str | None:
    """Kind of backtracking pattern starting at position i, judged from heights and types."""
    if not anchor_of(types[i]):
        return None
    n = len(values)
    if (i + 2 < n and values[i + 1] == values[i] + 1 and values[i + 2] == values[i]
            and types[i + 1] == "l"):
        return "simple"
    if (i + 4 < n and values[i + 1] == values[i] + 1 and values[i + 2] == values[i] + 2
            and values[i + 3] == values[i] + 1 and values[i + 4] == values[i]
            and types[i + 1] == "l" and types[i + 2] == "l"):
        return "double"
    return None


def _is_anchor_char(t) -> bool:
    return t != "l"


@dataclass(frozen=True)
class MHMeander:
    values: tuple[int, ...]
    types: tuple[str, ...]

    def __init__(self, pairs: Iterable[tuple[int, str]] | None = None, *, values=None, types=None):
        if pairs is not None:
            pairs = list(pairs)
            values = [p[0] for p in pairs]
            types = [p[1] for p in pairs]
        vals = tuple(int(x) for x in values)
        tys = tuple(_type_char(t) for t in types)
        if len(vals) != len(tys) or not vals:
            raise ValidationError("need one type per height")
        if vals[0] != 0 or min(vals) < 0 or any(abs(b - a) != 1 for a, b in zip(vals, vals[1:])):
            raise ValidationError("heights must form a meander")
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "types", tys)

    @classmethod
    def parse(cls, text: str) -> "MHMeander":
        """'0h,1l,2m' style pairs (separators optional)."""
        pairs = re.findall(r"(\d+)\s*[,:]?\s*([lmhℓ])", text)
        if not pairs or "".join(a + b for a, b in pairs) != re.sub(r"[\s,:()]", "", text):
            raise ValidationError(f"cannot parse typed meander {text!r}")
        return cls((int(a), b) for a, b in pairs)

    @property
    def pairs(self) -> tuple[tuple[int, str], ...]:
        return tuple(zip(self.values, self.types))

    @property
    def length(self) -> int:
        return len(self.values) - 1

    @property
    def final(self) -> int:
        return self.values[-1]

    @property
    def is_excursion(self) -> bool:
        return self.final == 0

    def type_conflict(self) -> int | None:
        """First position whose type differs from an earlier visit of the same node."""
        _, at = meander_tree(self.values)
        seen = {}
        for i, node in enumerate(at):
            if seen.setdefault(node, self.types[i]) != self.types[i]:
                return i
        return None

    def backtracks(self) -> list[tuple[int, str]]:
        out = []
        for i in range(len(self.values)):
            kind = _pattern_at(self.values, self.types, i, _is_anchor_char)
            if kind:
                out.append((i, kind))
        return out

    def is_mh(self) -> bool:
        """True when some (M,H)-walk has this encoding path."""
        return self.type_conflict() is None and not self.backtracks()

    def __str__(self):
        return ",".join(f"{v}{t}" for v, t in zip(self.values, self.types))


def encoding_path(mh: MHTree, walk: Walk) -> MHMeander:
    check_walk(mh.tree, walk)
    dist = distances_from(mh.tree, walk.start)
    return MHMeander(values=[int(dist[v]) for v in walk.vertices],
                     types=[TYPES[mh.types[v]] for v in walk.vertices])


# typed codes

_WILDCARDS = {"*": "lmh", "mh": "mh", "m/h": "mh", "l": "l", "ℓ": "l", "m": "m", "h": "h"}


def expand_pattern(pattern: Sequence[tuple[int, str]]) -> list[MHMeander]:
    """All typed meanders matching a wildcard pattern.

    Positions that revisit a node share its type. Choices are expanded per
    node in order of first visit, each in the order l < m < h.
    """
    values = [int(p[0]) for p in pattern]
    _, at = meander_tree(values)
    allowed: dict[int, set] = {}
    order: list[int] = []
    for (_, spec), node in zip(pattern, at):
        try:
            opts = set(_WILDCARDS[spec])
        except KeyError:
            raise ValidationError(f"unknown type pattern {spec!r}") from None
        if node not in allowed:
            allowed[node] = opts
            order.append(node)
        else:
            allowed[node] &= opts
    choices = [[t for t in TYPES if t in allowed[node]] for node in order]
    out = []
    for combo in itertools.product(*choices):
        pick = dict(zip(order, combo))
        out.append(MHMeander(values=values, types=[pick[node] for node in at]))
    return out


_BUILTIN_PATTERNS = {
    "trivial9": [[(0, "*"), (1, "*")]],
    "simple11": [
        [(0, "l"), (1, "*")],
        [(0, "mh"), (1, "mh")],
        [(0, "mh"), (1, "l"), (2, "mh")],
    ],
    "analysis50": [
        [(0, "l"), (1, "l"), (0, "l")],
        [(0, "*"), (1, "mh")],
        [(0, "l"), (1, "l"), (2, "*")],
        [(0, "mh"), (1, "l"), (2, "mh"), (3, "*")],
        [(0, "mh"), (1, "l"), (2, "l"), (3, "*")],
        [(0, "mh"), (1, "l"), (2, "*"), (1, "l"), (2, "*")],
        [(0, "mh"), (1, "l"), (2, "mh"), (1, "l"), (0, "mh")],
    ],
}


def _typed_extensions(p: tuple) -> list[tuple]:
    values = [x[0] for x in p]
    types = [x[1] for x in p]
    h = values[-1]
    out = [p + ((h + 1, t),) for t in TYPES]
    if h > 0:
        children, at = meander_tree(values)
        parent_node = next(i for i, c in enumerate(children) if at[-1] in c)
        parent_type = types[at.index(parent_node)]
        q = p + ((h - 1, parent_type),)
        qv = values + [h - 1]
        qt = types + [parent_type]
        bad = any(_pattern_at(qv, qt, i, _is_anchor_char) for i in (len(qv) - 3, len(qv) - 5) if i >= 0)
        if not bad:
            out.append(q)
    return out


def _typed_completion(p: tuple) -> MHMeander:
    """Close a valid typed prefix into an (M,H)-excursion through fresh m detours."""
    values = [x[0] for x in p]
    types = [x[1] for x in p]
    while values[-1] > 0:
        children, at = meander_tree(values)
        node = at[-1]
        parent_node = next(i for i, c in enumerate(children) if node in c)
        h = values[-1]
        values += [h + 1, h, h - 1]
        types += ["m", types[at.index(node)], types[at.index(parent_node)]]
    return MHMeander(values=values, types=types)


def validate_mh_code(words: Sequence[MHMeander]) -> CodeValidation:
    """Unique-prefix check over all (M,H)-excursions, with a witness on failure."""
    if not words:
        return CodeValidation(False, None, "empty code")
    tuples = []
    for w in words:
        if len(w.values) < 2 or w.values[1] != 1:
            return CodeValidation(False, w, "code words must start with an up-step")
        if 0 in w.values[1:-1]:
            return CodeValidation(False, w, "code words may touch 0 only at their ends")
        if not w.is_mh():
            return CodeValidation(False, w, "code word is not an (M,H)-meander")
        tuples.append(w.pairs)
    res = _explore_code(tuples, _typed_extensions, lambda p: p[-1][0] == 0,
                        _typed_completion, [((0, t),) for t in TYPES])
    if not res.ok and isinstance(res.counterexample, tuple):
        ce = res.counterexample
        ce = ce if isinstance(ce, MHMeander) else MHMeander(ce)
        res = CodeValidation(False, ce, res.reason)
    return res


class MHCode:
    """Ordered typed code words; ``families`` groups words expanded from one pattern."""

    def __init__(self, words: Sequence[MHMeander], name: str | None = None,
                 families: Sequence[int] | None = None):
        self.words = tuple(words)
        self.name = name
        self.families = tuple(families) if families is not None else tuple(range(len(self.words)))
        if len(self.families) != len(self.words):
            raise ValidationError("one family label per word")

    @classmethod
    def from_patterns(cls, patterns, name=None) -> "MHCode":
        words, fams = [], []
        for f, pat in enumerate(patterns):
            ws = expand_pattern(pat)
            words += ws
            fams += [f] * len(ws)
        return cls(words, name=name, families=fams)

    @property
    def size(self) -> int:
        return len(self.words)

    @cached_property
    def lengths(self) -> tuple[int, ...]:
        return tuple(w.length for w in self.words)

    @cached_property
    def finals(self) -> tuple[int, ...]:
        return tuple(w.final for w in self.words)

    @cached_property
    def _trie(self) -> _Trie:
        return _Trie([w.pairs for w in self.words])

    def validate(self) -> CodeValidation:
        return validate_mh_code(self.words)

    def family_sizes(self) -> list[int]:
        return list(Counter(self.families)[f] for f in sorted(set(self.families)))

    def __len__(self):
        return len(self.words)

    def __repr__(self):
        return f"MHCode({self.name or ''!s}, {self.size} words)"


def builtin_code(name: str) -> MHCode:
    try:
        pats = _BUILTIN_PATTERNS[name]
    except KeyError:
        raise ValidationError(f"unknown code {name!r}; choose from {sorted(_BUILTIN_PATTERNS)}") from None
    return MHCode.from_patterns(pats, name=name)


def mh_decompose(code: MHCode, e: MHMeander) -> PartitionedPath:
    if not e.is_excursion:
        raise ValidationError("mh_decompose needs an excursion")
    if (i := e.type_conflict()) is not None:
        raise ValidationError(f"position {i} revisits a vertex with a different type")
    if bt := e.backtracks():
        i, kind = bt[0]
        raise ValidationError(f"not an (M,H)-excursion: {kind} backtracking step at position {i}")
    parts = partition_path(e.values, e.pairs, code._trie, code.lengths, code.finals,
                           lambda s, base: (s[0] - base, s[1]))
    return PartitionedPath(parts, e.length, code.lengths, code.finals)


# typed embedding counts

def _masks_for(mh: MHTree, c: MHMeander):
    children, at = meander_tree(c.values)
    masks = [None] * len(children)
    for i, node in enumerate(at):
        if masks[node] is None:
            masks[node] = mh.masks[TYPES.index(c.types[i])]
    return masks


def mh_walk_counts(mh: MHTree, c: MHMeander, dp: _EdgeDP | None = None) -> np.ndarray:
    """Per start vertex number of (M,H)-walks with encoding path c."""
    if not c.is_mh():
        return np.zeros(mh.tree.n + 1, dtype=np.int64)
    dp = dp or _EdgeDP(mh.tree)
    return dp.root_counts(c.values, _masks_for(mh, c))


def delta_of_mh_meander(mh: MHTree, c: MHMeander) -> int:
    return int(max(mh_walk_counts(mh, c)[1:]))


def mh_code_deltas(mh: MHTree, code: MHCode) -> tuple[int, ...]:
    dp = _EdgeDP(mh.tree)
    return tuple(int(max(mh_walk_counts(mh, w, dp)[1:])) for w in code.words)


@dataclass(frozen=True)
class EpsilonReport:
    epsilon: float
    per_word: tuple[float, ...]      # Delta_T(c)^{2/(len+f)} / Delta_T
    deltas: tuple[int, ...]
    max_degree: int
    prefactor: int                   # (2a)^2

    def per_family(self, code: MHCode) -> dict[int, float]:
        out: dict[int, float] = {}
        for f, e in zip(code.families, self.per_word):
            out[f] = max(out.get(f, 0.0), e)
        return out


def epsilon(code: MHCode, mh: MHTree) -> EpsilonReport:
    delta = mh.tree.max_degree
    if delta < 1:
        raise ValidationError("epsilon needs a tree with an edge")
    deltas = mh_code_deltas(mh, code)
    per = tuple(d ** (2.0 / (lb + fb)) / delta for d, lb, fb in zip(deltas, code.lengths, code.finals))
    pre = (2 * code.size) ** 2
    return EpsilonReport(pre * max(per), per, deltas, delta, pre)


# bounds

def _log_count(x: float) -> float:
    return math.log(x) if x > 0 else -math.inf


def bound_mh_profile(code: MHCode, t, eps: float, delta: float) -> BoundValue:
    """2^a (eps Delta)^{k(t)}."""
    if eps < 0 or delta < 0:
        raise ValidationError("eps and Delta must be nonnegative")
    if not isinstance(t, CodeProfile):
        t = CodeProfile.of(code, t)
    a = code.size
    if t.k == 0:
        return BoundValue.of_exact(2 ** a)
    return BoundValue(a * math.log(2) + t.k * _log_count(eps * delta))


def bound_mh_length(a: int, k: int, eps: float, delta: float) -> BoundValue:
    """2^a (a^2 eps Delta)^k."""
    if eps < 0 or delta < 0 or k < 0:
        raise ValidationError("eps, Delta and k must be nonnegative")
    if k == 0:
        return BoundValue.of_exact(2 ** a)
    return BoundValue(a * math.log(2) + k * _log_count(a * a * eps * delta))


def f_tau_max(j: int, k: int, delta, delta2) -> Fraction:
    """Sum over s_h + s_m + 2d = k - j of
    C(2j+s_h+s_m+d, d) C(j+s_h, s_h) C(j-1+s_m, s_m) Delta^{s_h} (19/20 Delta)^{s_m} Delta2^d,
    with C(-1+s_m, s_m) read as [s_m = 0] when j = 0."""
    if not 0 <= j <= k:
        raise ValidationError("need 0 <= j <= k")
    delta = Fraction(delta)
    delta2 = Fraction(delta2)
    rest = k - j
    total = Fraction(0)
    for d in range(rest // 2 + 1):
        for s_h in range(rest - 2 * d + 1):
            s_m = rest - 2 * d - s_h
            if j == 0:
                cm = 1 if s_m == 0 else 0
            else:
                cm = math.comb(j - 1 + s_m, s_m)
            if cm == 0:
                continue
            term = math.comb(2 * j + s_h + s_m + d, d) * math.comb(j + s_h, s_h) * cm
            total += term * delta ** s_h * (Fraction(19, 20) * delta) ** s_m * delta2 ** d
    return total


def bound_Z(j: int, k: int, delta: float, delta2: float) -> BoundValue:
    """(k+1)^2 (1 + Delta2/Delta^2)^{2k} C(k,j) e^{20j} Delta^{k-j}."""
    if not 0 <= j <= k:
        raise ValidationError("need 0 <= j <= k")
    if not delta > 0:
        raise ValidationError("Delta must be positive")
    if j == k == 0:
        return BoundValue.of_exact(1)
    log = (2 * math.log(k + 1) + 2 * k * math.log1p(delta2 / delta ** 2)
           + math.log(math.comb(k, j)) + E20_LOG * j + (k - j) * math.log(delta))
    return BoundValue(log)


def _log1p_exp(x: float) -> float:
    return x + math.log1p(math.exp(-x)) if x > 0 else math.log1p(math.exp(x))


def _require_no_adjacent_high(mh: MHTree):
    pair = mh.adjacent_high_pair()
    if pair is not None:
        raise HypothesisViolation(
            f"vertices {pair[0]} and {pair[1]} are adjacent and both have degree "
            f">= {mh.high_frac} * max degree")


def _log_growth(code: MHCode, eps: float) -> float:
    """log(1 + e^20 a^2 eps)."""
    if eps <= 0:
        return 0.0
    return _log1p_exp(E20_LOG + 2 * math.log(code.size) + math.log(eps))


def bound_Nk(mh: MHTree, code: MHCode, k: int, eps: float | None = None) -> BoundValue:
    """2^a (k+1)^2 Delta^k (1 + Delta2/Delta^2)^{2k} (1 + e^20 a^2 eps)^k."""
    _require_no_adjacent_high(mh)
    if k < 0:
        raise ValidationError("k must be nonnegative")
    if eps is None:
        eps = epsilon(code, mh).epsilon
    delta = mh.tree.max_degree
    delta2 = max_sphere(mh.tree, 2)
    log = (code.size * math.log(2) + 2 * math.log(k + 1) + k * math.log(delta)
           + 2 * k * math.log1p(delta2 / delta ** 2) + k * _log_growth(code, eps))
    return BoundValue(log)


def bound_lambda1_mh(mh: MHTree, code: MHCode, eps: float | None = None) -> float:
    """sqrt(Delta) (1 + Delta2/Delta^2) sqrt(1 + e^20 a^2 eps)."""
    _require_no_adjacent_high(mh)
    if eps is None:
        eps = epsilon(code, mh).epsilon
    delta = mh.tree.max_degree
    delta2 = max_sphere(mh.tree, 2)
    return math.exp(0.5 * math.log(delta) + math.log1p(delta2 / delta ** 2)
                    + 0.5 * _log_growth(code, eps))


# reduction and brute force

def find_backtracks(mh: MHTree, vertices: Sequence[int], dist: np.ndarray) -> list[tuple[int, str]]:
    """All (position, kind) backtracking steps of a walk, distances taken from its start."""
    out = []
    anchor = mh.anchor
    low = ~anchor
    w = vertices
    for i in range(len(w) - 2):
        if not anchor[w[i]]:
            continue
        if w[i + 2] == w[i] and low[w[i + 1]] and dist[w[i + 1]] > dist[w[i]]:
            out.append((i, "simple"))
        if (i + 4 < len(w) and w[i + 4] == w[i] and low[w[i + 1]] and low[w[i + 2]]
                and dist[w[i + 2]] > dist[w[i + 1]] > dist[w[i]]):
            out.append((i, "double"))
    return out


def remove_backtrack(vertices: tuple, step: tuple[int, str]) -> tuple:
    i, kind = step
    span = 2 if kind == "simple" else 4
    return vertices[:i + 1] + vertices[i + span + 1:]


@dataclass(frozen=True)
class Removal:
    position: int              # index of the anchor in the walk at removal time
    kind: str
    removed: tuple[int, ...]   # vertices deleted after the anchor


@dataclass(frozen=True)
class ReducedWalk:
    walk: Walk
    removals: tuple[Removal, ...]

    def expand(self) -> tuple[int, ...]:
        """Reinsert the removed steps, newest first, to recover the original walk."""
        w = tuple(self.walk.vertices)
        for r in reversed(self.removals):
            w = w[:r.position + 1] + r.removed + w[r.position + 1:]
        return w

    @property
    def removed_length(self) -> int:
        return sum(len(r.removed) for r in self.removals)


def reduce_walk(mh: MHTree, walk: Walk) -> ReducedWalk:
    """Delete backtracking steps, leftmost first, until none remain."""
    check_walk(mh.tree, walk)
    if not walk.is_closed:
        raise ValidationError("reduce_walk needs a closed walk")
    dist = distances_from(mh.tree, walk.start)
    w = tuple(int(x) for x in walk.vertices)
    log = []
    while True:
        steps = find_backtracks(mh, w, dist)
        if not steps:
            break
        i, kind = steps[0]
        span = 2 if kind == "simple" else 4
        log.append(Removal(i, kind, w[i + 1:i + span + 1]))
        w = remove_backtrack(w, steps[0])
    return ReducedWalk(Walk(w), tuple(log))


def is_mh_walk(mh: MHTree, vertices: Sequence[int]) -> bool:
    dist = distances_from(mh.tree, vertices[0])
    return not find_backtracks(mh, vertices, dist)


def count_mh_bruteforce(mh: MHTree, v: int, k: int, state_cap: int = 2_000_000) -> int:
    """Closed (M,H)-walks of length 2k from v, by a DP over the last four vertices."""
    check_vertex(mh.tree, v)
    if k < 0:
        raise ValidationError("k must be nonnegative")
    dist = distances_from(mh.tree, v)
    anchor = mh.anchor
    adj = mh.tree.adjacency
    states = Counter({(v,): 1})
    total = 2 * k
    for step in range(total):
        left = total - step - 1
        nxt: Counter = Counter()
        for window, cnt in states.items():
            for y in adj[window[-1]]:
                y = int(y)
                if dist[y] > left:
                    continue
                w = window + (y,)
                if (len(w) >= 3 and anchor[w[-3]] and w[-1] == w[-3] and not anchor[w[-2]]
                        and dist[w[-2]] > dist[w[-3]]):
                    continue
                if (len(w) >= 5 and anchor[w[-5]] and w[-1] == w[-5] and not anchor[w[-4]]
                        and not anchor[w[-3]] and dist[w[-3]] > dist[w[-4]] > dist[w[-5]]):
                    continue
                nxt[w[-4:]] += cnt
        if len(nxt) > state_cap:
            raise ValidationError(f"state space exceeds the cap of {state_cap}")
        states = nxt
    return sum(c for w, c in states.items() if w[-1] == v)


def reduction_fibers(mh: MHTree, v: int, k: int) -> Counter:
    """Sizes of the classes of closed length-2k walks from v sharing a reduced walk."""
    fibers: Counter = Counter()
    for w in enumerate_walks(mh.tree, v, 2 * k):
        fibers[reduce_walk(mh, Walk(w)).walk.vertices] += 1
    return fibers


def max_fiber_sizes(mh: MHTree, k: int) -> dict[int, int]:
    """Z(j, k) by brute force: largest class size per reduced half-length j, over all starts."""
    out: dict[int, int] = {}
    for v in range(1, mh.tree.n + 1):
        for red, size in reduction_fibers(mh, v, k).items():
            j = (len(red) - 1) // 2
            out[j] = max(out.get(j, 0), size)
    return out


def mh_profile_counts(mh: MHTree, v: int, code: MHCode, k: int) -> dict[tuple[int, ...], int]:
    """Closed (M,H)-walks of length 2k from v grouped by typed code profile."""
    out: dict[tuple[int, ...], int] = {}
    for w in enumerate_walks(mh.tree, v, 2 * k):
        if not is_mh_walk(mh, w):
            continue
        if k == 0:
            t = (0,) * code.size
        else:
            parts = mh_decompose(code, encoding_path(mh, Walk(w))).parts
            counts = Counter(b for _, b in parts)
            t = tuple(counts.get(b, 0) for b in range(code.size))
        out[t] = out.get(t, 0) + 1
    return out

