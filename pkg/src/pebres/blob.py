"""The blob-pebble game.

A subconfiguration [B]<W> is a black blob B (a nonempty chain) together
with white pebbles W inside lpp(B).  Both parts are stored as int
bitmasks.  Since vertex ids are sorted by level, the bottom of a chain is
its lowest set bit and the top its highest.
"""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

from .dag import LayeredDag, bits, to_mask
from .pebbling import BudgetExceeded, state_cap


class BlobError(ValueError):
    def __init__(self, msg: str, step: int | None = None):
        self.step = step
        super().__init__(msg if step is None else f"move {step}: {msg}")


class Inconclusive(RuntimeError):
    pass


def low(m: int) -> int:
    return (m & -m).bit_length() - 1


def high(m: int) -> int:
    return m.bit_length() - 1


@dataclass(frozen=True, order=True)
class Sub:
    """A blob subconfiguration; ordering is (bottom of B, B, W)."""
    bot: int
    B: int
    W: int

    @staticmethod
    def of(B: int, W: int = 0) -> "Sub":
        if not B:
            raise BlobError("empty black blob")
        return Sub(low(B), B, W)

    def show(self, dag: LayeredDag) -> str:
        return "[" + ",".join(dag.label(self.B)) + "]<" + ",".join(dag.label(self.W)) + ">"

    def as_json(self) -> dict:
        return {"B": bits(self.B), "W": bits(self.W)}

    @property
    def atomic(self) -> bool:
        return self.B & (self.B - 1) == 0

    @property
    def independent(self) -> bool:
        return self.W == 0


Config = frozenset  # frozenset[Sub]


def sub(dag: LayeredDag, B: Iterable[int | str], W: Iterable[int | str] = ()) -> Sub:
    """Build and validate a subconfiguration from vertex ids or names."""
    s = Sub.of(dag.mask(B), dag.mask(W))
    check_sub(dag, s)
    return s


def sub_from_json(obj: dict) -> Sub:
    return Sub.of(to_mask(obj["B"]), to_mask(obj.get("W", [])))


def check_sub(dag: LayeredDag, s: Sub) -> None:
    if not dag.is_chain_mask(s.B):
        raise BlobError("black blob is not totally ordered")
    if s.B & s.W:
        raise BlobError("black blob and white pebbles overlap")
    if s.W & ~dag.lpp_mask(s.B):
        raise BlobError("white pebbles outside legal pebble positions")


def show_config(dag: LayeredDag, cfg: Iterable[Sub]) -> str:
    return "{" + ", ".join(s.show(dag) for s in sorted(cfg)) + "}"


# -- moves ----------------------------------------------------------------------

@dataclass(frozen=True)
class BlobMove:
    op: str                 # intro | merge | inflate | erase
    v: int = -1             # intro vertex, or merger vertex
    a: Sub | None = None    # merge: first premise (whites contain v); inflate/erase: the subconfig
    b: Sub | None = None    # merge: second premise (blob contains v); inflate: the result
    step: int | None = None  # source step index when produced by a translation

    def as_json(self) -> dict:
        out: dict = {"op": self.op}
        if self.op == "intro":
            out["v"] = self.v
        elif self.op == "merge":
            out.update(v=self.v, a=self.a.as_json(), b=self.b.as_json())
        elif self.op == "inflate":
            out.update({"from": self.a.as_json(), "to": self.b.as_json()})
        else:
            out["sc"] = self.a.as_json()
        if self.step is not None:
            out["step"] = self.step
        return out

    @staticmethod
    def from_json(obj: dict) -> "BlobMove":
        op = obj["op"]
        step = obj.get("step")
        if op == "intro":
            return BlobMove("intro", int(obj["v"]), step=step)
        if op == "merge":
            return BlobMove("merge", int(obj.get("v", -1)), sub_from_json(obj["a"]), sub_from_json(obj["b"]), step)
        if op == "inflate":
            return BlobMove("inflate", a=sub_from_json(obj["from"]), b=sub_from_json(obj["to"]), step=step)
        if op == "erase":
            return BlobMove("erase", a=sub_from_json(obj["sc"]), step=step)
        raise BlobError(f"unknown move {op!r}")


def intro(dag: LayeredDag, v: int) -> Sub:
    return Sub.of(1 << v, to_mask(dag.preds[v]))


def merge(dag: LayeredDag, s1: Sub, s2: Sub) -> Sub:
    """Merger of s1 and s2 on the unique vertex of B2 carrying a white pebble in s1."""
    B = s1.B | s2.B
    if not dag.is_chain_mask(B):
        raise BlobError("merger: B1 u B2 is not a chain")
    if s1.B & s2.W:
        raise BlobError("merger: B1 meets W2")
    vs = s2.B & s1.W
    if not vs or vs & (vs - 1):
        raise BlobError("merger: B2 n W1 must be a single vertex")
    B &= ~vs
    W = (s1.W | s2.W) & ~vs & dag.lpp_mask(B)
    return Sub.of(B, W)


def merger_vertex(s1: Sub, s2: Sub) -> int:
    vs = s2.B & s1.W
    return low(vs) if vs else -1


def check_inflation(dag: LayeredDag, s: Sub, t: Sub) -> None:
    if s.B & ~t.B:
        raise BlobError("inflation: new blob does not contain the old one")
    if not dag.is_chain_mask(t.B):
        raise BlobError("inflation: new blob is not a chain")
    if t.B & s.W:
        raise BlobError("inflation: new blob meets old white pebbles")
    lpp = dag.lpp_mask(t.B)
    if t.W & ~lpp:
        raise BlobError("inflation: white pebbles outside legal pebble positions")
    if s.W & lpp & ~t.W:
        raise BlobError("inflation: a kept white pebble was dropped")


def apply_blob(config: Iterable[Sub], move: BlobMove, dag: LayeredDag) -> frozenset:
    cfg = frozenset(config)
    if move.op == "intro":
        if not 0 <= move.v < dag.n:
            raise BlobError(f"no vertex {move.v}")
        return cfg | {intro(dag, move.v)}
    if move.op == "merge":
        for s in (move.a, move.b):
            if s not in cfg:
                raise BlobError(f"merger premise {bits(s.B)}<{bits(s.W)}> not in configuration")
        new = merge(dag, move.a, move.b)
        if move.v >= 0 and merger_vertex(move.a, move.b) != move.v:
            raise BlobError("merger vertex does not match")
        return cfg | {new}
    if move.op == "inflate":
        if move.a not in cfg:
            raise BlobError("inflation premise not in configuration")
        check_inflation(dag, move.a, move.b)
        return cfg | {move.b}
    if move.op == "erase":
        if move.a not in cfg:
            raise BlobError("erased subconfiguration not in configuration")
        return cfg - {move.a}
    raise BlobError(f"unknown move {move.op!r}")


def run_blob(dag: LayeredDag, moves: Sequence[BlobMove], start: Iterable[Sub] = ()) -> list[frozenset]:
    seq = [frozenset(start)]
    for k, mv in enumerate(moves, 1):
        try:
            seq.append(apply_blob(seq[-1], mv, dag))
        except BlobError as exc:
            raise BlobError(str(exc), k) from None
    return seq


def chargeable(config: Iterable[Sub], dag: LayeredDag) -> int:
    """Mask of chargeable vertices: blob bottoms and whites strictly below them."""
    m = 0
    for s in config:
        m |= (1 << s.bot) | (s.W & dag.below_mask[s.bot])
    return m


def blob_cost(config: Iterable[Sub], dag: LayeredDag) -> int:
    return bin(chargeable(config, dag)).count("1")


def pebbling_blob_cost(dag: LayeredDag, moves: Sequence[BlobMove], start: Iterable[Sub] = ()) -> int:
    return max(blob_cost(c, dag) for c in run_blob(dag, moves, start))


def final_config(dag: LayeredDag) -> frozenset:
    return frozenset([Sub.of(1 << dag.sink)])


def lift_black(dag: LayeredDag, moves: Sequence[tuple[str, int]]) -> list[BlobMove]:
    """Mimic a black pebbling with atomic blobs of the same cost."""
    out: list[BlobMove] = []
    for op, v in moves:
        if op == "-b":
            out.append(BlobMove("erase", a=Sub.of(1 << v)))
            continue
        if op != "+b":
            raise BlobError("only black moves can be lifted")
        cur = intro(dag, v)
        out.append(BlobMove("intro", v))
        for p in dag.preds[v]:
            nxt = merge(dag, cur, Sub.of(1 << p))
            out.append(BlobMove("merge", p, cur, Sub.of(1 << p)))
            out.append(BlobMove("erase", a=cur))
            cur = nxt
    return out


# -- exact price search -----------------------------------------------------------

def all_chains(dag: LayeredDag) -> list[int]:
    """Every nonempty chain as a mask, built by extending downwards."""
    out = []

    def grow(m: int, b: int) -> None:
        out.append(m)
        below = dag.below_mask[b] & ~(1 << b)
        for v in bits(below):
            grow(m | 1 << v, v)

    for t in range(dag.n):
        grow(1 << t, t)
    return out


@dataclass
class BlobPriceResult:
    price: int
    states_explored: int
    witness: list[BlobMove]

    def as_dict(self) -> dict:
        return {"price": self.price, "states_explored": self.states_explored,
                "witness": [m.as_json() for m in self.witness]}


def _successors(dag: LayeredDag, cfg: frozenset, chains_above: dict[int, list[int]], full: bool = False):
    for v in range(dag.n):
        s = intro(dag, v)
        if s not in cfg:
            yield cfg | {s}, BlobMove("intro", v)
    items = sorted(cfg)
    for s1 in items:
        for s2 in items:
            if s1 is s2 or not s2.B & s1.W:
                continue
            try:
                new = merge(dag, s1, s2)
            except BlobError:
                continue
            if new not in cfg:
                yield cfg | {new}, BlobMove("merge", merger_vertex(s1, s2), s1, s2)
    for s in items:
        for B in ([s.B] if full else []) + chains_above[s.B]:
            if B & s.W:
                continue
            lpp = dag.lpp_mask(B)
            base = s.W & lpp
            extra = lpp & ~base if full else 0
            e = extra
            while True:
                t = Sub.of(B, base | e)
                if t != s and t not in cfg:
                    yield cfg | {t}, BlobMove("inflate", a=s, b=t)
                if not e:
                    break
                e = (e - 1) & extra
    for s in items:
        yield cfg - {s}, BlobMove("erase", a=s)


def blob_price_exact(dag: LayeredDag, max_cost: int | None = None, max_subconfigs: int = 4,
                     max_states: int | None = None, full_inflation: bool = False) -> BlobPriceResult:
    """Least cost of a blob-pebbling from the empty configuration to {[z]<>}.

    Breadth-first search over canonical configurations, once per cost bound
    k = 1, 2, ...  Inflations only produce the minimal white set W' n lpp(B)
    unless ``full_inflation`` is set, which also tries every larger white set.
    """
    if dag.n > 7:
        raise BudgetExceeded("blob search supports at most 7 vertices")
    max_cost = dag.h + 3 if max_cost is None else max_cost
    cap = max_states if max_states is not None else state_cap()
    chains = all_chains(dag)
    chains_above = {B: [C for C in chains if C != B and C & B == B] for B in chains}
    goal = final_config(dag)
    explored = 0
    for k in range(1, max_cost + 1):
        start: frozenset = frozenset()
        parent: dict[frozenset, tuple[frozenset, BlobMove] | None] = {start: None}
        q = deque([start])
        found = False
        while q and not found:
            cfg = q.popleft()
            for nxt, mv in _successors(dag, cfg, chains_above, full_inflation):
                if nxt in parent or len(nxt) > max_subconfigs or blob_cost(nxt, dag) > k:
                    continue
                parent[nxt] = (cfg, mv)
                if nxt == goal:
                    found = True
                    break
                q.append(nxt)
                if len(parent) > cap:
                    raise BudgetExceeded(f"more than {cap} blob configurations at cost {k}")
        explored += len(parent)
        if found:
            moves = []
            cfg = goal
            while parent[cfg] is not None:
                cfg, mv = parent[cfg]
                moves.append(mv)
            return BlobPriceResult(k, explored, moves[::-1])
    raise Inconclusive(f"inconclusive at (cost {max_cost}, size {max_subconfigs})")


_SUB_RE = re.compile(r"\[([^\]]*)\]\s*<([^>]*)>")


def parse_config(dag: LayeredDag, text: str) -> frozenset:
    """Parse subconfigurations written like ``[u2,z]<s2,s3>``, separated by
    whitespace, commas or semicolons."""
    out = set()
    pos = 0
    for m in _SUB_RE.finditer(text):
        if text[pos:m.start()].strip(" \t\n,;"):
            raise BlobError(f"cannot parse {text[pos:m.start()]!r}")
        pos = m.end()
        split = lambda s: [t for t in (x.strip() for x in s.split(",")) if t]
        out.add(sub(dag, split(m.group(1)), split(m.group(2))))
    if text[pos:].strip(" \t\n,;"):
        raise BlobError(f"cannot parse {text[pos:]!r}")
    return frozenset(out)
