"""Pebbling contradictions and DIMACS interchange."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

from .dag import LayeredDag

Clause = tuple[int, ...]

MAX_VAR = 2**31 - 1


class FormulaError(ValueError):
    pass


def check_clause(c: Iterable[int]) -> Clause:
    c = tuple(c)
    if any(l == 0 for l in c):
        raise FormulaError("literal 0 inside clause")
    if len({abs(l) for l in c}) != len(c):
        raise FormulaError(f"clause {c} mentions a variable twice")
    return c


@dataclass
class CnfFormula:
    nvars: int
    clauses: list[Clause]
    # vertex id -> (level, index); only present for graph-derived formulas
    vertex_map: dict[int, tuple[int, int]] | None = None
    degree: int | None = None
    groups: list[str] | None = None

    def __post_init__(self) -> None:
        self.clauses = [check_clause(c) for c in self.clauses]
        for c in self.clauses:
            for l in c:
                if abs(l) > self.nvars:
                    raise FormulaError(f"literal {l} out of range 1..{self.nvars}")

    def width(self) -> int:
        return max((len(c) for c in self.clauses), default=0)

    def clause_multiset(self) -> dict[frozenset[int], int]:
        out: dict[frozenset[int], int] = {}
        for c in self.clauses:
            k = frozenset(c)
            out[k] = out.get(k, 0) + 1
        return out


@dataclass
class PebblingFormula(CnfFormula):
    dag: LayeredDag | None = field(default=None, repr=False)
    # set once the target axioms are removed; the clause to be derived instead
    goal: Clause | None = None

    def var(self, v: int, i: int) -> int:
        return var_id(self.degree, v, i)

    def all_pos(self, v: int) -> Clause:
        return all_pos(self.degree, v)

    def group_counts(self) -> dict[str, int]:
        out = {"source": 0, "pebbling": 0, "target": 0}
        for g in self.groups:
            out[g] += 1
        return out

    def vertex_of(self, x: int) -> tuple[int, int]:
        """(vertex, i) for variable x."""
        return (x - 1) // self.degree, (x - 1) % self.degree + 1


def var_id(d: int, v: int, i: int) -> int:
    """Variable of x(v)_i; vertex ids are 0-based so ord(v) = v + 1."""
    return d * v + i


def all_pos(d: int, v: int) -> Clause:
    return tuple(var_id(d, v, i) for i in range(1, d + 1))


def all_pos_set(d: int, vs: Iterable[int]) -> Clause:
    return tuple(x for v in sorted(vs) for x in all_pos(d, v))


def pebbling_contradiction(dag: LayeredDag, d: int) -> PebblingFormula:
    if d < 1:
        raise FormulaError("degree must be at least 1")
    if d * dag.n > MAX_VAR:
        raise FormulaError(f"{d * dag.n} variables exceed the DIMACS id width")
    clauses: list[Clause] = []
    groups: list[str] = []
    for s in dag.sources:
        clauses.append(all_pos(d, s))
        groups.append("source")
    for w in range(dag.n):
        if dag.is_source(w):
            continue
        u, v = dag.preds[w]
        for i in range(1, d + 1):
            for j in range(1, d + 1):
                clauses.append((-var_id(d, u, i), -var_id(d, v, j)) + all_pos(d, w))
                groups.append("pebbling")
    for i in range(1, d + 1):
        clauses.append((-var_id(d, dag.sink, i),))
        groups.append("target")
    vmap = {v: (dag.level[v], dag.index[v]) for v in range(dag.n)}
    return PebblingFormula(d * dag.n, clauses, vmap, d, groups, dag=dag)


def strip_targets(f: PebblingFormula) -> PebblingFormula:
    keep = [k for k, g in enumerate(f.groups) if g != "target"]
    return replace(f, clauses=[f.clauses[k] for k in keep],
                   groups=[f.groups[k] for k in keep],
                   goal=all_pos(f.degree, f.dag.sink))


def disjoint_conjunction(f: CnfFormula, g: CnfFormula) -> tuple[CnfFormula, dict[int, int]]:
    """f AND g with g's variables shifted past f's; returns the renaming of g."""
    shift = f.nvars
    ren = {x: x + shift for x in range(1, g.nvars + 1)}
    moved = [tuple(l + shift if l > 0 else l - shift for l in c) for c in g.clauses]
    return CnfFormula(f.nvars + g.nvars, list(f.clauses) + moved), ren


# -- DIMACS -------------------------------------------------------------------

def to_dimacs(f: CnfFormula) -> str:
    lines = []
    if f.degree is not None:
        lines.append(f"c degree {f.degree}")
    if f.vertex_map:
        for v, (L, i) in sorted(f.vertex_map.items()):
            lines.append(f"c map v={v} level={L} idx={i}")
    if f.groups is not None:
        lines.append("c groups " + " ".join(f.groups))
    if isinstance(f, PebblingFormula) and f.goal is not None:
        lines.append("c goal " + " ".join(map(str, f.goal)))
    lines.append(f"p cnf {f.nvars} {len(f.clauses)}")
    lines += [" ".join(map(str, c + (0,))) for c in f.clauses]
    return "\n".join(lines) + "\n"


def from_dimacs(text: str) -> CnfFormula:
    nvars = ncl = None
    vmap: dict[int, tuple[int, int]] = {}
    degree = None
    groups = None
    tokens: list[int] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("c"):
            tok = line.split()
            if len(tok) >= 2 and tok[1] == "map":
                kv = dict(t.split("=", 1) for t in tok[2:] if "=" in t)
                try:
                    vmap[int(kv["v"])] = (int(kv["level"]), int(kv["idx"]))
                except (KeyError, ValueError):
                    raise FormulaError(f"line {lineno}: malformed map comment") from None
            elif len(tok) == 3 and tok[1] == "degree":
                degree = int(tok[2])
            elif len(tok) >= 2 and tok[1] == "groups":
                groups = tok[2:]
            continue
        if line.startswith("p"):
            tok = line.split()
            if nvars is not None or len(tok) != 4 or tok[1] != "cnf":
                raise FormulaError(f"line {lineno}: malformed header {raw!r}")
            try:
                nvars, ncl = int(tok[2]), int(tok[3])
            except ValueError:
                raise FormulaError(f"line {lineno}: malformed header {raw!r}") from None
            if nvars < 0 or ncl < 0:
                raise FormulaError(f"line {lineno}: malformed header {raw!r}")
            continue
        if nvars is None:
            raise FormulaError(f"line {lineno}: clause before header")
        try:
            tokens.extend(int(t) for t in line.split())
        except ValueError:
            raise FormulaError(f"line {lineno}: non-integer literal") from None
    if nvars is None:
        raise FormulaError("missing 'p cnf' header")
    clauses: list[Clause] = []
    cur: list[int] = []
    for t in tokens:
        if t == 0:
            clauses.append(tuple(cur))
            cur = []
        else:
            if abs(t) > nvars:
                raise FormulaError(f"literal {t} out of range 1..{nvars}")
            cur.append(t)
    if cur:
        raise FormulaError("missing terminating 0")
    if len(clauses) != ncl:
        raise FormulaError(f"header announces {ncl} clauses, found {len(clauses)}")
    if groups is not None and len(groups) != len(clauses):
        groups = None
    return CnfFormula(nvars, clauses, vmap or None, degree, groups)


def formula_from_dimacs(text: str, dag: LayeredDag | None = None) -> CnfFormula:
    """Parse and, if a graph is given and the map matches, attach it."""
    f = from_dimacs(text)
    if dag is None or f.degree is None or f.groups is None:
        return f
    goal = all_pos(f.degree, dag.sink) if "target" not in f.groups else None
    return PebblingFormula(f.nvars, f.clauses, f.vertex_map, f.degree, f.groups, dag=dag, goal=goal)


def clause_str(c: Sequence[int], f: PebblingFormula | None = None) -> str:
    if not c:
        return "[]"
    if f is None or f.dag is None:
        return " v ".join(map(str, c))
    parts = []
    for l in c:
        v, i = f.vertex_of(abs(l))
        parts.append(("-" if l < 0 else "") + f"{f.dag.name(v)}_{i}")
    return " v ".join(parts)
