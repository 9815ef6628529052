"""Meanders, Dyck paths and prefix codes; partition, compression and
reconstruction of Dyck paths; exact walk counts and the untyped bounds.

A meander is a ±1 path c_0 = 0, c_i >= 0. A prefix code is a finite set of
meanders such that every Dyck path of positive length has exactly one of
them as a prefix. Decomposing a Dyck path with a code assigns every step
to a part labelled by a code word.
"""

from __future__ import annotations

import bisect
import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Callable, Iterator, Sequence

import numpy as np

from .errors import DecodeError, MalformedCodeError, ValidationError
from .tree_core import LabeledTree, Walk, check_vertex, check_walk, distances_from


# meanders

@dataclass(frozen=True)
class Meander:
    values: tuple[int, ...]

    def __init__(self, values):
        vals = tuple(int(x) for x in values)
        object.__setattr__(self, "values", vals)
        if not vals or vals[0] != 0:
            raise ValidationError("a meander starts at 0")
        if min(vals) < 0:
            raise ValidationError("a meander stays nonnegative")
        if any(abs(b - a) != 1 for a, b in zip(vals, vals[1:])):
            raise ValidationError("meander steps must be +1 or -1")

    @classmethod
    def parse(cls, text: str) -> "Meander":
        """'0121' (single digits) or '0,1,2,1'."""
        text = text.strip()
        try:
            if "," in text:
                return cls(int(x) for x in text.split(","))
            return cls(int(ch) for ch in text)
        except ValueError:
            raise ValidationError(f"cannot parse meander {text!r}") from None

    @classmethod
    def from_steps(cls, steps: str) -> "Meander":
        """Up/down string using U/D or 1/0."""
        vals = [0]
        for ch in steps.strip():
            if ch in "U1":
                vals.append(vals[-1] + 1)
            elif ch in "D0":
                vals.append(vals[-1] - 1)
            else:
                raise ValidationError(f"bad step character {ch!r}")
        return cls(vals)

    @property
    def length(self) -> int:
        return len(self.values) - 1

    @property
    def final(self) -> int:
        return self.values[-1]

    @property
    def is_dyck(self) -> bool:
        return self.final == 0

    def __len__(self):
        return len(self.values)

    def __getitem__(self, i):
        return self.values[i]

    def __str__(self):
        if max(self.values) < 10:
            return "".join(str(x) for x in self.values)
        return ",".join(str(x) for x in self.values)


def dyck_paths(k: int) -> Iterator[Meander]:
    """All Dyck paths of length 2k in lexicographic order of their values."""
    def rec(prefix, ups):
        downs = len(prefix) - 1 - ups
        if ups == k and downs == k:
            yield Meander(prefix)
            return
        h = prefix[-1]
        if h > 0:
            yield from rec(prefix + [h - 1], ups)
        if ups < k:
            yield from rec(prefix + [h + 1], ups + 1)
    yield from rec([0], 0)


def catalan(k: int) -> int:
    return math.comb(2 * k, k) // (k + 1)


def dyck_of_walk(tree: LabeledTree, walk: Walk) -> Meander:
    """Distances from w_0 along the walk."""
    check_walk(tree, walk)
    dist = distances_from(tree, walk.start)
    return Meander(int(dist[v]) for v in walk.vertices)


# shared decomposition machinery (also used for typed paths)

class _Trie:
    """Words as symbol sequences; relative symbols are matched from a start index."""

    END = object()

    def __init__(self, words: Sequence[Sequence]):
        self.root: dict = {}
        for b, w in enumerate(words):
            node = self.root
            for s in w:
                node = node.setdefault(s, {})
            node[self.END] = b

    def match(self, symbols: Sequence, start: int, rel: Callable) -> int | None:
        node = self.root
        i = start
        while i < len(symbols):
            node = node.get(rel(symbols[i]))
            if node is None:
                return None
            if self.END in node:
                return node[self.END]
            i += 1
        return None


def partition_path(heights: Sequence[int], symbols: Sequence, trie: _Trie,
                   lengths: Sequence[int], finals: Sequence[int],
                   relabel: Callable[[object, int], object]):
    """Recursive partition of the steps 1..len of an excursion.

    relabel(symbol, base) gives the symbol relative to the base level.
    Returns parts as (sorted step tuple, word index), sorted by first step.
    """
    parts = []
    stack = [(0, len(heights) - 1, 0)]
    while stack:
        lo, hi, base = stack.pop()
        i = lo
        while i < hi:
            j = i + 1
            while heights[j] != base:
                j += 1
            b = trie.match(symbols, i, lambda s, base=base: relabel(s, base))
            if b is None:
                raise MalformedCodeError(
                    f"no code word is a prefix of the excursion starting at step {i}",
                    witness=tuple(relabel(s, base) for s in symbols[i:j + 1]))
            end = i + lengths[b]
            f = finals[b]
            if end > j:
                raise MalformedCodeError("code word runs past the end of its excursion",
                                         witness=tuple(relabel(s, base) for s in symbols[i:j + 1]))
            part = list(range(i + 1, end + 1))
            sig = end
            for t in range(1, f + 1):
                prev = sig
                sig += 1
                while heights[sig] != base + f - t:
                    sig += 1
                part.append(sig)
                if sig > prev + 1:
                    stack.append((prev, sig - 1, base + f - t + 1))
            parts.append((tuple(part), b))
            i = j
    parts.sort()
    return tuple(parts)


# prefix codes

@dataclass(frozen=True)
class CodeValidation:
    ok: bool
    counterexample: object = None
    reason: str = ""

    def __bool__(self):
        return self.ok


def _explore_code(words: Sequence[tuple], extensions: Callable[[tuple], list],
                  is_excursion: Callable[[tuple], bool], complete: Callable[[tuple], tuple],
                  roots: list) -> CodeValidation:
    """Walk the tree of path prefixes until every branch hits a word."""
    word_set = set(words)
    for a in words:
        for b in words:
            if a is not b and len(a) <= len(b) and b[:len(a)] == a:
                return CodeValidation(False, b, f"word {a} is a prefix of word {b}")
    prefixes = {w[:i] for w in words for i in range(1, len(w))}
    frontier = deque(roots)
    while frontier:
        p = frontier.popleft()
        if p in word_set:
            continue
        if len(p) > 1 and is_excursion(p):
            return CodeValidation(False, p, "excursion without a code-word prefix")
        if p not in prefixes:
            return CodeValidation(False, complete(p), "path prefix not covered by any code word")
        frontier.extend(extensions(p))
    return CodeValidation(True)


def validate_prefix_code(words: Sequence[Meander]) -> CodeValidation:
    """Check the unique-prefix property over all positive-length Dyck paths."""
    if not words:
        return CodeValidation(False, None, "empty code")
    tuples = []
    for w in words:
        w = w if isinstance(w, Meander) else Meander(w)
        v = w.values
        if len(v) < 2 or v[1] != 1:
            return CodeValidation(False, w, "code words must start with the step 0 -> 1")
        if 0 in v[1:-1]:
            return CodeValidation(False, w, "code words may touch 0 only at their ends")
        tuples.append(v)

    def ext(p):
        h = p[-1]
        return [p + (h + 1,)] + ([p + (h - 1,)] if h > 0 else [])

    def complete(p):
        return Meander(p + tuple(range(p[-1] - 1, -1, -1)))

    res = _explore_code(tuples, ext, lambda p: p[-1] == 0, complete, [(0,)])
    if not res.ok and isinstance(res.counterexample, tuple):
        res = CodeValidation(False, Meander(res.counterexample), res.reason)
    return res


class PrefixCode:
    """An ordered list of meander code words."""

    def __init__(self, words: Sequence[Meander | str | Sequence[int]], name: str | None = None,
                 check: bool = True):
        ws = []
        for w in words:
            if isinstance(w, str):
                w = Meander.parse(w)
            elif not isinstance(w, Meander):
                w = Meander(w)
            ws.append(w)
        self.words = tuple(ws)
        self.name = name
        if check:
            res = validate_prefix_code(self.words)
            if not res.ok:
                raise MalformedCodeError(f"not a prefix code: {res.reason}", witness=res.counterexample)

    @classmethod
    def builtin(cls, name: str) -> "PrefixCode":
        try:
            words = BUILTIN_CODES[name]
        except KeyError:
            raise ValidationError(f"unknown code {name!r}; choose from {sorted(BUILTIN_CODES)}") from None
        return cls(words, name=name)

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
        return _Trie([w.values for w in self.words])

    def __iter__(self):
        return iter(self.words)

    def __len__(self):
        return len(self.words)

    def __repr__(self):
        return f"PrefixCode([{', '.join(str(w) for w in self.words)}])"


BUILTIN_CODES = {
    "trivial": ("01",),
    "pair": ("010", "012"),
    "cstar": ("010", "0121", "0123"),
}


# partitions

@dataclass(frozen=True)
class CodeProfile:
    t: tuple[int, ...]
    lengths: tuple[int, ...]
    finals: tuple[int, ...]

    @classmethod
    def of(cls, code, t: Sequence[int]) -> "CodeProfile":
        t = tuple(int(x) for x in t)
        if len(t) != code.size:
            raise ValidationError(f"profile has {len(t)} entries, code has {code.size} words")
        if min(t, default=0) < 0:
            raise ValidationError("profile entries are nonnegative")
        return cls(t, tuple(code.lengths), tuple(code.finals))

    @property
    def two_k(self) -> int:
        return sum(tb * (lb + fb) for tb, lb, fb in zip(self.t, self.lengths, self.finals))

    @property
    def k(self) -> int:
        return self.two_k // 2

    @property
    def q(self) -> int:
        return sum(tb * (1 + fb) for tb, fb in zip(self.t, self.finals))


@dataclass(frozen=True)
class PartitionedPath:
    parts: tuple[tuple[tuple[int, ...], int], ...]
    length: int
    lengths: tuple[int, ...]
    finals: tuple[int, ...]

    def words_used(self) -> list[int]:
        return [b for _, b in self.parts]


def decompose(code: PrefixCode, d: Meander | str) -> PartitionedPath:
    if isinstance(d, str):
        d = Meander.parse(d)
    if not d.is_dyck:
        raise ValidationError("decompose needs a Dyck path (final value 0)")
    parts = partition_path(d.values, d.values, code._trie, code.lengths, code.finals,
                           lambda s, base: s - base)
    return PartitionedPath(parts, d.length, code.lengths, code.finals)


def profile(partitioned: PartitionedPath) -> CodeProfile:
    t = [0] * len(partitioned.lengths)
    for _, b in partitioned.parts:
        t[b] += 1
    return CodeProfile(tuple(t), partitioned.lengths, partitioned.finals)


@dataclass(frozen=True)
class Compressed:
    parts: tuple[tuple[tuple[int, ...], int], ...]     # (pi_hat, word) sorted by min
    primes: tuple[tuple[int, ...], ...]                # pi' in the same order
    blocks: dict                                       # word -> sorted Pi_b

    def as_pairs(self) -> list[tuple[tuple[int, ...], int]]:
        return list(self.parts)


def compress(partitioned: PartitionedPath) -> Compressed:
    primes = []
    for part, b in partitioned.parts:
        primes.append((part[0],) + part[partitioned.lengths[b]:])
    union = sorted(x for p in primes for x in p)
    rank = {x: i + 1 for i, x in enumerate(union)}
    hats = tuple((tuple(rank[x] for x in p), b) for p, (_, b) in zip(primes, partitioned.parts))
    blocks: dict[int, list[int]] = {}
    for hat, b in hats:
        blocks.setdefault(b, []).extend(hat)
    return Compressed(hats, tuple(primes), {b: tuple(sorted(v)) for b, v in sorted(blocks.items())})


def reconstruct(code: PrefixCode, compressed: Compressed | Sequence) -> Meander:
    """Rebuild the Dyck path from (pi_hat, word) pairs.

    Each compressed index k is shifted by the forced runs of every part
    whose first compressed index is smaller, which recovers pi'; the forced
    run after its minimum then recovers pi, and each part dictates its step
    directions.
    """
    pairs = compressed.as_pairs() if isinstance(compressed, Compressed) else list(compressed)
    if not pairs:
        return Meander([0])
    pairs = sorted(((tuple(sorted(h)), int(b)) for h, b in pairs), key=lambda x: x[0][0])
    for _, b in pairs:
        if not 0 <= b < code.size:
            raise DecodeError(f"word index {b} out of range")
    mins = [h[0] for h, _ in pairs]
    gaps = np.cumsum([0] + [code.lengths[b] - 1 for _, b in pairs]).tolist()

    def shift(k):
        return k + gaps[bisect.bisect_left(mins, k)]

    total = sum(code.lengths[b] + code.finals[b] for _, b in pairs)
    step = [0] * (total + 1)
    for hat, b in pairs:
        if len(hat) != 1 + code.finals[b]:
            raise DecodeError("part size does not match its code word")
        prime = [shift(k) for k in hat]
        L = code.lengths[b]
        part = list(range(prime[0], prime[0] + L)) + prime[1:]
        word = code.words[b].values
        dirs = [word[i + 1] - word[i] for i in range(L)] + [-1] * code.finals[b]
        for pos, dstep in zip(part, dirs):
            if not 1 <= pos <= total or step[pos] != 0:
                raise DecodeError("parts do not partition the step set")
            step[pos] = dstep
    vals = np.concatenate([[0], np.cumsum(step[1:])])
    if vals.min() < 0 or vals[-1] != 0:
        raise DecodeError("data does not describe a Dyck path")
    d = Meander(vals.tolist())
    redo = compress(decompose(code, d))
    if sorted(redo.parts) != sorted(pairs):
        raise DecodeError("data is not the compression of any decomposition")
    return d


def ballot_count(t: int, f: int) -> int:
    """Paths with t steps +f and t*f steps -1 from 0 to 0 staying >= 0."""
    if t < 0 or f < 0:
        raise ValidationError("t and f must be nonnegative")
    m = t * (1 + f)
    return math.comb(m + 1, t) // (m + 1)


# walk counting

def count_closed_walks(tree: LabeledTree, v: int, k: int) -> int:
    """(A^{2k})_{vv} by repeated integer matrix-vector products."""
    check_vertex(tree, v)
    if k < 0:
        raise ValidationError("k must be nonnegative")
    if tree.n == 1:
        return 1 if k == 0 else 0
    exact = k * math.log(4 * max(tree.max_degree, 1)) >= 60 * math.log(2)
    x = np.zeros(tree.n + 1, dtype=object if exact else np.int64)
    if exact:
        x[:] = 0
    x[v] = 1
    starts = tree.indptr[1:-1]
    for _ in range(2 * k):
        y = np.zeros_like(x)
        y[1:] = np.add.reduceat(x[tree.indices], starts)
        x = y
    return int(x[v])


def enumerate_walks(tree: LabeledTree, v: int, length: int, closed: bool = True) -> Iterator[tuple[int, ...]]:
    """Explicit depth-first enumeration of walks from v (closed ones by default)."""
    check_vertex(tree, v)
    dist = distances_from(tree, v) if closed else None
    adj = tree.adjacency
    walk = [v]

    def rec(remaining):
        x = walk[-1]
        if remaining == 0:
            if not closed or x == v:
                yield tuple(walk)
            return
        for y in adj[x]:
            if closed and dist[y] > remaining - 1:
                continue
            walk.append(y)
            yield from rec(remaining - 1)
            walk.pop()

    yield from rec(length)


def meander_tree(values: Sequence[int]) -> tuple[list[list[int]], list[int]]:
    """Nodes created by up-steps of a meander: (children lists, node at each position)."""
    children: list[list[int]] = [[]]
    parent = [-1]
    at = [0]
    cur = 0
    for a, b in zip(values, values[1:]):
        if b > a:
            children.append([])
            parent.append(cur)
            children[cur].append(len(children) - 1)
            cur = len(children) - 1
        else:
            cur = parent[cur]
        at.append(cur)
    return children, at


class _EdgeDP:
    """Homomorphism counts of meander trees into a labeled tree, all roots at once.

    A walk w from v with D(w) = c is determined by where each up-step goes,
    namely to a neighbour farther from v. For a directed edge (p -> x) and a
    node N, g_N(p -> x) counts images of the subtree of N when N sits at x
    and N's parent sits at p.
    """

    def __init__(self, tree: LabeledTree):
        self.tree = tree
        n = tree.n
        self.src = np.repeat(np.arange(n + 1), np.diff(tree.indptr))
        self.dst = np.asarray(tree.indices)
        key = self.src * (n + 1) + self.dst
        rkey = self.dst * (n + 1) + self.src
        self.rev = np.searchsorted(key, rkey)
        self.starts = tree.indptr[1:-1]

    def _out(self, g):
        out = np.zeros(self.tree.n + 1, dtype=g.dtype)
        out[1:] = np.add.reduceat(g, self.starts)
        return out

    def root_counts(self, values: Sequence[int], masks: list | None = None) -> np.ndarray:
        """Per start vertex count of walks following the meander.

        masks[node] is an optional boolean array over vertices restricting
        where that node may be placed.
        """
        children, _ = meander_tree(values)
        n = self.tree.n
        if n == 1:
            ok = len(children) == 1 and (masks is None or masks[0] is None or masks[0][1])
            return np.array([0, 1 if ok else 0], dtype=np.int64)
        ups = len(children) - 1
        big = ups * math.log(max(self.tree.max_degree, 2)) >= 60 * math.log(2)
        dtype = object if big else np.int64
        g = [None] * len(children)
        for node in range(len(children) - 1, 0, -1):
            val = np.ones(self.dst.size, dtype=dtype)
            for c in children[node]:
                val = val * (self._out(g[c])[self.dst] - g[c][self.rev])
            if masks is not None and masks[node] is not None:
                val = val * masks[node][self.dst]
            g[node] = val
        root = np.ones(n + 1, dtype=dtype)
        for c in children[0]:
            root = root * self._out(g[c])
        if masks is not None and masks[0] is not None:
            root = root * masks[0]
        root[0] = 0
        return root


def walk_counts_by_path(tree: LabeledTree, values: Sequence[int]) -> np.ndarray:
    """Number of walks w from each start vertex with D(w) = values."""
    return _EdgeDP(tree).root_counts(values)


def delta_of_meander(tree: LabeledTree, c: Meander | str) -> int:
    """Max over start vertices of the number of walks following c."""
    if isinstance(c, str):
        c = Meander.parse(c)
    return int(max(walk_counts_by_path(tree, c.values)[1:]))


def profile_counts(tree: LabeledTree, v: int, code: PrefixCode, k: int) -> dict[tuple[int, ...], int]:
    """Closed walks of length 2k from v grouped by their code profile."""
    check_vertex(tree, v)
    dp = _EdgeDP(tree)
    out: dict[tuple[int, ...], int] = {}
    for d in dyck_paths(k):
        cnt = int(dp.root_counts(d.values)[v]) if k else 1
        if cnt:
            t = profile(decompose(code, d)).t if k else (0,) * code.size
            out[t] = out.get(t, 0) + cnt
    return out


def count_by_profile(tree: LabeledTree, v: int, code: PrefixCode, t: CodeProfile | Sequence[int]) -> int:
    if not isinstance(t, CodeProfile):
        t = CodeProfile.of(code, t)
    if t.two_k % 2:
        return 0
    return profile_counts(tree, v, code, t.k).get(t.t, 0)


def feasible_profiles(code, k: int) -> list[tuple[int, ...]]:
    """All t with sum t_b (len_b + f_b) = 2k."""
    sizes = [l + f for l, f in zip(code.lengths, code.finals)]
    out = []

    def rec(b, rest, acc):
        if b == len(sizes):
            if rest == 0:
                out.append(tuple(acc))
            return
        for tb in range(rest // sizes[b] + 1):
            rec(b + 1, rest - tb * sizes[b], acc + [tb])

    rec(0, 2 * k, [])
    return out


def code_deltas(tree: LabeledTree, code: PrefixCode) -> tuple[int, ...]:
    dp = _EdgeDP(tree)
    return tuple(int(max(dp.root_counts(w.values)[1:])) for w in code.words)


# bounds

EXACT_Q_LIMIT = 4000


@dataclass(frozen=True)
class BoundValue:
    """A nonnegative bound kept as a natural log, with the exact value when known."""

    log: float
    exact: int | Fraction | None = None

    @classmethod
    def of_exact(cls, x) -> "BoundValue":
        return cls(_log(x), x)

    @property
    def value(self) -> float:
        if self.exact is not None:
            try:
                return float(self.exact)
            except OverflowError:
                return math.inf
        return math.exp(self.log) if self.log < 709 else math.inf

    def __float__(self):
        return self.value

    def dominates(self, count, rel_slack: float = 0.0) -> bool:
        """True when count <= bound * (1 + rel_slack)."""
        if self.exact is not None and isinstance(count, int) and rel_slack == 0.0:
            return count <= self.exact
        if count <= 0:
            return True
        return _log(count) <= self.log + math.log1p(rel_slack)


def _log(x) -> float:
    if x == 0:
        return -math.inf
    if isinstance(x, Fraction):
        return math.log(x.numerator) - math.log(x.denominator)
    return math.log(x)


@dataclass(frozen=True)
class TrivialBound:
    catalan_form: int   # Catalan(k) * Delta^k
    crude: int          # (4 Delta)^k


def bound_trivial(k: int, delta: int) -> TrivialBound:
    if k < 0 or delta < 1:
        raise ValidationError("need k >= 0 and Delta >= 1")
    return TrivialBound(catalan(k) * delta ** k, (4 * delta) ** k)


def _check_profile(code, t) -> CodeProfile:
    if not isinstance(t, CodeProfile):
        t = CodeProfile.of(code, t)
    return t


def bound_exact_code(code, t, deltas: Sequence[int]) -> BoundValue:
    """multinomial(q; t_b(1+f_b)) * prod_b ballot(t_b, f_b) * Delta_T(c_b)^{t_b}."""
    t = _check_profile(code, t)
    if len(deltas) != len(t.t):
        raise ValidationError("one Delta_T(c) value per code word is required")
    sizes = [tb * (1 + fb) for tb, fb in zip(t.t, t.finals)]
    if t.q <= EXACT_Q_LIMIT and all(isinstance(x, (int, np.integer)) for x in deltas):
        val = math.factorial(t.q)
        for s in sizes:
            val //= math.factorial(s)
        for tb, fb, db in zip(t.t, t.finals, deltas):
            val *= ballot_count(tb, fb) * int(db) ** tb
        return BoundValue.of_exact(val)
    log = math.lgamma(t.q + 1) - sum(math.lgamma(s + 1) for s in sizes)
    for tb, fb, db in zip(t.t, t.finals, deltas):
        if tb == 0:
            continue
        if db == 0:
            return BoundValue(-math.inf, None)
        m = tb * (1 + fb)
        log += math.lgamma(m + 2) - math.lgamma(tb + 1) - math.lgamma(m - tb + 2) - math.log(m + 1)
        log += tb * math.log(db)
    return BoundValue(log, None)


def kl_weights(code, delta: float, deltas: Sequence[float]) -> tuple[float, ...]:
    """g_b = ((1 v 2e f_b) Delta_T(c_b) / Delta^{(len_b + f_b)/2})^{1/(1+f_b)}."""
    out = []
    for lb, fb, db in zip(code.lengths, code.finals, deltas):
        base = max(1.0, 2 * math.e * fb) * db / delta ** ((lb + fb) / 2)
        out.append(base ** (1.0 / (1 + fb)))
    return tuple(out)


def bound_kl(code, t, delta: float, deltas: Sequence[float]) -> BoundValue:
    """e sqrt(q) Delta^k (sum_b g_b)^q, log-space.

    For q = 0 the Stirling step behind the formula does not apply and the
    bound is taken to be 1, the count of the empty walk.
    """
    if not delta > 0:
        raise ValidationError("reference degree must be positive")
    t = _check_profile(code, t)
    if t.q == 0:
        return BoundValue(0.0, 1)
    s = sum(kl_weights(code, delta, deltas))
    if s == 0:
        return BoundValue(-math.inf, 0)
    return BoundValue(1 + 0.5 * math.log(t.q) + t.k * math.log(delta) + t.q * math.log(s))


def kl_trivial_printed(k: int, delta: float) -> BoundValue:
    """The trivial-code closed form e k^{1/2} (4 e^2 Delta)^k as printed."""
    if k == 0:
        return BoundValue(0.0, 1)
    return BoundValue(1 + 0.5 * math.log(k) + k * math.log(4 * math.e ** 2 * delta))


def bound_simple_lambda1(delta: float, delta2: float, delta3: float) -> float:
    """sqrt(Delta) (1 + sqrt(2e Delta2/Delta^2) + (6e Delta3/Delta^3)^{1/4})."""
    if delta < 1 or delta2 < 0 or delta3 < 0:
        raise ValidationError("need Delta >= 1 and Delta2, Delta3 >= 0")
    return math.sqrt(delta) * (1 + math.sqrt(2 * math.e * delta2 / delta ** 2)
                               + (6 * math.e * delta3 / delta ** 3) ** 0.25)
