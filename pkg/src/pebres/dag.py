"""Layered DAGs, reachability tables and path utilities.

Vertices are dense integer ids ordered by (level, index).  Levels are
0-based, indices inside a level are 1-based.  Vertex sets are passed
around either as Python collections or as int bitmasks (bit v set iff
vertex v is in the set); most hot paths use the masks.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

MAX_ENUM_VERTICES = 64

# per-level name prefixes used for small graphs (sink is always "z")
_LEVEL_LETTERS = "suvwxy"


class GraphError(ValueError):
    pass


@dataclass(frozen=True)
class Violation:
    kind: str
    detail: str

    def __str__(self) -> str:
        return f"{self.kind}: {self.detail}"


def bits(mask: int) -> list[int]:
    """Vertex ids in ``mask`` in increasing order."""
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def to_mask(vs: Iterable[int]) -> int:
    m = 0
    for v in vs:
        m |= 1 << v
    return m


def diagnose(level_counts: Sequence[int], edges: Iterable[tuple[int, int]]) -> list[Violation]:
    """Everything that keeps the described graph from being blob-pebblable."""
    out: list[Violation] = []
    level: list[int] = []
    for L, c in enumerate(level_counts):
        if c < 1:
            out.append(Violation("empty level", f"level {L} has {c} vertices"))
        level.extend([L] * max(c, 0))
    n = len(level)
    if n == 0:
        return [Violation("empty graph", "no vertices")]
    preds: list[set[int]] = [set() for _ in range(n)]
    outdeg = [0] * n
    for a, b in edges:
        if not (0 <= a < n and 0 <= b < n):
            out.append(Violation("unknown vertex", f"edge {a}->{b}"))
            continue
        if level[b] != level[a] + 1:
            out.append(Violation("non-consecutive edge", f"edge {a}->{b} spans levels {level[a]}->{level[b]}"))
        if a in preds[b]:
            out.append(Violation("duplicate edge", f"edge {a}->{b}"))
        preds[b].add(a)
        outdeg[a] += 1
    for v in range(n):
        k = len(preds[v])
        if level[v] == 0 and k:
            out.append(Violation("bad indegree", f"level-0 vertex {v} has indegree {k}"))
        if level[v] > 0 and k != 2:
            out.append(Violation("bad indegree", f"vertex {v} on level {level[v]} has indegree {k}, expected 2"))
    sinks = [v for v in range(n) if outdeg[v] == 0]
    if len(sinks) != 1:
        out.append(Violation("sink count", f"{len(sinks)} vertices with outdegree 0: {sinks}"))
    if out:
        return out
    # sibling non-reachability: the two predecessors of a vertex are incomparable
    below = [0] * n
    for v in range(n):
        m = 1 << v
        for p in preds[v]:
            m |= below[p]
        below[v] = m
    for v in range(n):
        if len(preds[v]) == 2:
            a, b = sorted(preds[v])
            if below[a] >> b & 1 or below[b] >> a & 1:
                out.append(Violation("sibling reachability", f"predecessors {a},{b} of {v} are comparable"))
    return out


class LayeredDag:
    """A layered blob-pebblable DAG with precomputed reachability masks."""

    def __init__(self, level_counts: Sequence[int], edges: Iterable[tuple[int, int]],
                 names: Sequence[str] | None = None, kind: str = "layered"):
        edges = [(int(a), int(b)) for a, b in edges]
        problems = diagnose(level_counts, edges)
        if problems:
            raise GraphError("; ".join(str(p) for p in problems))
        self.kind = kind
        self.level_counts = tuple(int(c) for c in level_counts)
        self.num_levels = len(self.level_counts)
        self.h = self.num_levels - 1
        lev: list[int] = []
        idx: list[int] = []
        for L, c in enumerate(self.level_counts):
            lev.extend([L] * c)
            idx.extend(range(1, c + 1))
        self.level = tuple(lev)
        self.index = tuple(idx)
        self.n = len(lev)
        pr: list[list[int]] = [[] for _ in range(self.n)]
        sc: list[list[int]] = [[] for _ in range(self.n)]
        for a, b in edges:
            pr[b].append(a)
            sc[a].append(b)
        self.preds = tuple(tuple(sorted(p)) for p in pr)
        self.succs = tuple(tuple(sorted(s)) for s in sc)
        self.edges = tuple(sorted(edges))
        self.sink = next(v for v in range(self.n) if not self.succs[v])
        self.sources = tuple(v for v in range(self.n) if not self.preds[v])
        self.sources_mask = to_mask(self.sources)
        self.all_mask = (1 << self.n) - 1

        below = [0] * self.n
        for v in range(self.n):
            m = 1 << v
            for p in self.preds[v]:
                m |= below[p]
            below[v] = m
        above = [0] * self.n
        for v in reversed(range(self.n)):
            m = 1 << v
            for s in self.succs[v]:
                m |= above[s]
            above[v] = m
        self.below_mask = tuple(below)
        self.above_mask = tuple(above)
        self.level_mask = tuple(to_mask(v for v in range(self.n) if self.level[v] == L)
                                for L in range(self.num_levels))
        # vertices on level >= j
        ge = [0] * (self.num_levels + 1)
        for L in reversed(range(self.num_levels)):
            ge[L] = ge[L + 1] | self.level_mask[L]
        self.level_ge_mask = tuple(ge)

        if names is None:
            names = default_names(self.level_counts)
        self.names = tuple(names)
        self._by_name = {nm: v for v, nm in enumerate(self.names)}

    # -- naming -----------------------------------------------------------
    def name(self, v: int) -> str:
        return self.names[v]

    def vertex(self, key: int | str) -> int:
        if isinstance(key, int):
            if not 0 <= key < self.n:
                raise GraphError(f"no vertex {key}")
            return key
        if key in self._by_name:
            return self._by_name[key]
        if key.isdigit():
            return self.vertex(int(key))
        raise GraphError(f"no vertex named {key!r}")

    def vs(self, keys: Iterable[int | str]) -> frozenset[int]:
        return frozenset(self.vertex(k) for k in keys)

    def mask(self, keys: Iterable[int | str]) -> int:
        return to_mask(self.vertex(k) for k in keys)

    def label(self, vs: Iterable[int] | int) -> list[str]:
        if isinstance(vs, int):
            vs = bits(vs)
        return [self.names[v] for v in sorted(vs)]

    # -- relations --------------------------------------------------------
    def below(self, v: int) -> frozenset[int]:
        return frozenset(bits(self.below_mask[v]))

    def above(self, v: int) -> frozenset[int]:
        return frozenset(bits(self.above_mask[v]))

    def is_source(self, v: int) -> bool:
        return not self.preds[v]

    def is_chain_mask(self, m: int) -> bool:
        for v in bits(m):
            if m & ~(self.below_mask[v] | self.above_mask[v]):
                return False
        return True

    def is_chain(self, B: Iterable[int]) -> bool:
        return self.is_chain_mask(to_mask(B))

    def bot(self, B: Iterable[int] | int) -> int:
        vs = bits(B) if isinstance(B, int) else list(B)
        return min(vs, key=lambda v: (self.level[v], v))

    def top(self, B: Iterable[int] | int) -> int:
        vs = bits(B) if isinstance(B, int) else list(B)
        return max(vs, key=lambda v: (self.level[v], v))

    def lpp_mask(self, B: int) -> int:
        """Legal pebble positions of the chain ``B`` as a mask."""
        chain = sorted(bits(B), key=lambda v: self.level[v])
        if not chain:
            raise GraphError("empty chain")
        m = self.below_mask[chain[0]]
        for a, b in zip(chain, chain[1:]):
            if not self.below_mask[b] >> a & 1:
                raise GraphError("not totally ordered")
            m |= self.above_mask[a] & self.below_mask[b]
        return m & ~B

    def lpp(self, B: Iterable[int]) -> frozenset[int]:
        return frozenset(bits(self.lpp_mask(to_mask(B))))

    def __repr__(self) -> str:
        return f"LayeredDag({self.kind}, levels={list(self.level_counts)})"

    def to_text(self) -> str:
        lines = [f"layered {self.num_levels}"]
        lines += [f"level {L} {c}" for L, c in enumerate(self.level_counts)]
        lines += [f"edge {a} {b}" for a, b in self.edges]
        return "\n".join(lines) + "\n"


def default_names(level_counts: Sequence[int]) -> list[str]:
    top = len(level_counts) - 1
    out = []
    for L, c in enumerate(level_counts):
        for i in range(1, c + 1):
            if L == top and c == 1:
                out.append("z")
            elif top <= len(_LEVEL_LETTERS):
                out.append(f"{_LEVEL_LETTERS[L]}{i}")
            else:
                out.append(f"l{L}_{i}")
    return out


def make_pyramid(h: int) -> LayeredDag:
    if h < 1:
        raise GraphError("pyramid height must be at least 1")
    counts = [h + 1 - L for L in range(h + 1)]
    start = [0]
    for c in counts:
        start.append(start[-1] + c)
    edges = []
    for L in range(1, h + 1):
        for i in range(counts[L]):
            v = start[L] + i
            edges.append((start[L - 1] + i, v))
            edges.append((start[L - 1] + i + 1, v))
    return LayeredDag(counts, edges, kind=f"pyramid:{h}")


def make_tree(h: int) -> LayeredDag:
    if h < 1:
        raise GraphError("tree height must be at least 1")
    counts = [2 ** (h - L) for L in range(h + 1)]
    start = [0]
    for c in counts:
        start.append(start[-1] + c)
    edges = []
    for L in range(1, h + 1):
        for i in range(counts[L]):
            v = start[L] + i
            edges.append((start[L - 1] + 2 * i, v))
            edges.append((start[L - 1] + 2 * i + 1, v))
    return LayeredDag(counts, edges, kind=f"tree:{h}")


def parse_graph(text: str) -> LayeredDag:
    """Read the plain ``layered`` / ``level`` / ``edge`` text format."""
    num_levels = None
    counts: dict[int, int] = {}
    edges = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        try:
            if tok[0] == "layered" and len(tok) == 2:
                num_levels = int(tok[1])
            elif tok[0] == "level" and len(tok) == 3:
                counts[int(tok[1])] = int(tok[2])
            elif tok[0] == "edge" and len(tok) == 3:
                edges.append((int(tok[1]), int(tok[2])))
            else:
                raise ValueError
        except ValueError:
            raise GraphError(f"line {lineno}: cannot parse {raw!r}") from None
    if num_levels is None:
        raise GraphError("missing 'layered' header")
    if sorted(counts) != list(range(num_levels)):
        raise GraphError(f"expected level lines for 0..{num_levels - 1}")
    return LayeredDag([counts[L] for L in range(num_levels)], edges)


def graph_from_spec(spec: str) -> LayeredDag:
    """``pyramid:<h>``, ``tree:<h>`` or a path to a graph file."""
    kind, _, arg = spec.partition(":")
    if kind in ("pyramid", "tree") and arg:
        try:
            h = int(arg)
        except ValueError:
            raise GraphError(f"bad height in {spec!r}") from None
        return make_pyramid(h) if kind == "pyramid" else make_tree(h)
    try:
        with open(spec) as fh:
            return parse_graph(fh.read())
    except OSError as exc:
        raise GraphError(f"unknown graph spec {spec!r}: {exc.strerror}") from None


def validate_blob_pebblable(dag: LayeredDag | tuple[Sequence[int], Iterable[tuple[int, int]]]
                            ) -> tuple[bool, list[Violation]]:
    if isinstance(dag, LayeredDag):
        counts, edges = dag.level_counts, dag.edges
    else:
        counts, edges = dag
    problems = diagnose(counts, list(edges))
    return not problems, problems


def relations(dag: LayeredDag) -> dict[str, list]:
    """Per-vertex tables: level, pred, succ, below, above and strict variants."""
    n = range(dag.n)
    return {
        "level": list(dag.level),
        "pred": [frozenset(dag.preds[v]) for v in n],
        "succ": [frozenset(dag.succs[v]) for v in n],
        "below": [dag.below(v) for v in n],
        "above": [dag.above(v) for v in n],
        "below_strict": [dag.below(v) - {v} for v in n],
        "above_strict": [dag.above(v) - {v} for v in n],
    }


def _guard(dag: LayeredDag) -> None:
    if dag.n > MAX_ENUM_VERTICES:
        raise GraphError(f"graph has {dag.n} vertices; enumeration is limited to {MAX_ENUM_VERTICES}")


def source_paths(dag: LayeredDag, w: int) -> Iterator[tuple[int, ...]]:
    """All source paths ending at ``w``, listed bottom to top."""
    _guard(dag)

    def walk(v: int, suffix: tuple[int, ...]) -> Iterator[tuple[int, ...]]:
        if not dag.preds[v]:
            yield (v,) + suffix
            return
        for p in dag.preds[v]:
            yield from walk(p, (v,) + suffix)

    yield from walk(w, ())


def paths_via(dag: LayeredDag, B: Iterable[int]) -> tuple[list[tuple[int, ...]], frozenset[int]]:
    """Source paths through the chain ``B`` ending at its top, and lpp(B)."""
    m = to_mask(B)
    if not m:
        raise GraphError("empty chain")
    if not dag.is_chain_mask(m):
        raise GraphError("not totally ordered")
    t = dag.top(m)
    paths = [p for p in source_paths(dag, t) if to_mask(p) & m == m]
    return paths, dag.lpp(bits(m))


def is_path(dag: LayeredDag, P: Sequence[int]) -> bool:
    return all(a in dag.preds[b] for a, b in zip(P, P[1:]))


def converging_paths(dag: LayeredDag, P: Sequence[int]) -> list[tuple[int, ...]]:
    """Source paths joining ``P`` (bottom to top) once per level above its start.

    The i-th path enters P at its i-th vertex through the predecessor that is
    not on P, reaching that predecessor by always taking the predecessor in
    the same position (left or right) on the way down.
    """
    P = list(P)
    if len(P) < 2:
        raise GraphError("path must span at least two levels")
    if not is_path(dag, P):
        raise GraphError("path is not contiguous")
    out = []
    for i in range(1, len(P)):
        v, prev = P[i], P[i - 1]
        side = 0 if dag.preds[v][0] != prev else 1
        x = dag.preds[v][side]
        down = [x]
        while dag.preds[x]:
            x = dag.preds[x][side]
            down.append(x)
        out.append(tuple(reversed(down)) + tuple(P[i:]))
    return out
