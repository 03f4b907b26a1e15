"""Black and black-white pebble games: moves, cost and exact price search."""

from __future__ import annotations

import os
from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

from .dag import LayeredDag

Move = tuple[str, int]  # ("+b" | "-b" | "+w" | "-w", vertex)
MOVE_KINDS = ("+b", "-b", "+w", "-w")
DEFAULT_STATE_CAP = 5_000_000


class PebblingError(ValueError):
    def __init__(self, msg: str, step: int | None = None):
        self.step = step
        super().__init__(msg if step is None else f"move {step}: {msg}")


class BudgetExceeded(RuntimeError):
    pass


def state_cap(default: int = DEFAULT_STATE_CAP) -> int:
    env = os.environ.get("PEBRES_BUDGET_STATES")
    return int(env) if env else default


@dataclass(frozen=True)
class BwConfig:
    B: frozenset[int] = frozenset()
    W: frozenset[int] = frozenset()

    def __post_init__(self) -> None:
        if self.B & self.W:
            raise PebblingError("a vertex carries both a black and a white pebble")

    @property
    def cost(self) -> int:
        return len(self.B) + len(self.W)


@dataclass
class Pebbling:
    moves: list[Move]
    start: BwConfig = field(default_factory=BwConfig)

    def to_text(self) -> str:
        return "".join(f"{op} {v}\n" for op, v in self.moves)


def parse_pebbling(text: str, dag: LayeredDag | None = None) -> Pebbling:
    moves = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        tok = raw.split()
        if not tok or tok[0].startswith("#"):
            continue
        if len(tok) != 2 or tok[0] not in MOVE_KINDS:
            raise PebblingError(f"line {lineno}: cannot parse {raw!r}")
        v = dag.vertex(tok[1]) if dag is not None else int(tok[1])
        moves.append((tok[0], v))
    return Pebbling(moves)


def apply_bw(config: BwConfig, move: Move, dag: LayeredDag) -> BwConfig:
    op, v = move
    B, W = config.B, config.W
    covered = all(p in B or p in W for p in dag.preds[v])
    if op == "+b":
        if v in B or v in W:
            raise PebblingError("vertex occupied")
        if not covered:
            raise PebblingError("predecessors uncovered")
        return BwConfig(B | {v}, W)
    if op == "-b":
        if v not in B:
            raise PebblingError("no such pebble")
        return BwConfig(B - {v}, W)
    if op == "+w":
        if v in B or v in W:
            raise PebblingError("vertex occupied")
        return BwConfig(B, W | {v})
    if op == "-w":
        if v not in W:
            raise PebblingError("no such pebble")
        if not covered:
            raise PebblingError("predecessors uncovered")
        return BwConfig(B, W - {v})
    raise PebblingError(f"unknown move {op!r}")


def run(dag: LayeredDag, p: Pebbling | Sequence[Move]) -> list[BwConfig]:
    """All configurations visited by ``p``, starting configuration included."""
    if not isinstance(p, Pebbling):
        p = Pebbling(list(p))
    seq = [p.start]
    for k, mv in enumerate(p.moves, 1):
        try:
            seq.append(apply_bw(seq[-1], mv, dag))
        except PebblingError as exc:
            raise PebblingError(str(exc), k) from None
    return seq


def pebbling_cost(dag: LayeredDag, p: Pebbling | Sequence[Move]) -> int:
    return max(c.cost for c in run(dag, p))


def is_complete(dag: LayeredDag, p: Pebbling | Sequence[Move]) -> bool:
    goal = BwConfig(frozenset([dag.sink]))
    seq = run(dag, p)
    return seq[0] == BwConfig() and goal in seq


def check_black_complete(dag: LayeredDag, moves: Sequence[Move]) -> None:
    if any(op not in ("+b", "-b") for op, _ in moves):
        raise PebblingError("black pebbling contains white moves")
    seq = run(dag, moves)
    if seq[-1] != BwConfig(frozenset([dag.sink])):
        raise PebblingError("pebbling does not end with a lone black pebble on the sink")


def reverse_dual(moves: Sequence[Move]) -> list[Move]:
    """Play ``moves`` backwards with colours swapped."""
    flip = {"+b": "-w", "-b": "+w", "+w": "-b", "-w": "+b"}
    return [(flip[op], v) for op, v in reversed(moves)]


def black_strategy(dag: LayeredDag) -> Pebbling:
    """Pebble the sink as if the graph were unfolded into a binary tree.

    Pebbling a vertex on level L this way never uses more than L + 2
    pebbles: first predecessor (L + 1), then the second one while holding
    the first (1 + L + 1), then the vertex itself with both predecessors.
    """
    moves: list[Move] = []

    def pebble(v: int) -> None:
        if dag.is_source(v):
            moves.append(("+b", v))
            return
        a, b = dag.preds[v]
        pebble(a)
        pebble(b)
        moves.extend([("+b", v), ("-b", a), ("-b", b)])

    pebble(dag.sink)
    return Pebbling(moves)


@dataclass
class PriceResult:
    mode: str
    price: int | None
    states_explored: int
    witness: list[Move]

    def as_dict(self, dag: LayeredDag | None = None) -> dict:
        return {"mode": self.mode, "price": self.price, "states_explored": self.states_explored,
                "witness": [f"{op} {v}" for op, v in self.witness]}


def _search(dag: LayeredDag, white: bool, k: int, cap: int) -> tuple[list[Move] | None, int]:
    """BFS over (B, W) masks with at most k pebbles; returns a shortest witness."""
    n = dag.n
    pm = [sum(1 << p for p in dag.preds[v]) for v in range(n)]
    goal = (1 << dag.sink, 0)
    start = (0, 0)
    parent: dict[tuple[int, int], tuple[tuple[int, int], Move] | None] = {start: None}
    q = deque([start])
    while q:
        st = q.popleft()
        if st == goal:
            break
        B, W = st
        occ = B | W
        used = bin(occ).count("1")
        succ = []
        for v in range(n):
            bit = 1 << v
            if B & bit:
                succ.append(((B ^ bit, W), ("-b", v)))
            elif W & bit:
                if pm[v] & occ == pm[v]:
                    succ.append(((B, W ^ bit), ("-w", v)))
            elif used < k:
                if pm[v] & occ == pm[v]:
                    succ.append(((B | bit, W), ("+b", v)))
                if white:
                    succ.append(((B, W | bit), ("+w", v)))
        succ.sort(key=lambda s: (MOVE_KINDS.index(s[1][0]), s[1][1]))
        for nxt, mv in succ:
            if nxt not in parent:
                parent[nxt] = (st, mv)
                q.append(nxt)
                if len(parent) > cap:
                    raise BudgetExceeded(f"more than {cap} states at budget {k}")
    if goal not in parent:
        return None, len(parent)
    moves = []
    st = goal
    while parent[st] is not None:
        st, mv = parent[st]
        moves.append(mv)
    return moves[::-1], len(parent)


def exact_price(dag: LayeredDag, mode: str = "black", budget: int | None = None,
                max_states: int | None = None) -> PriceResult:
    """Least k admitting a complete pebbling with at most k pebbles.

    Raises BudgetExceeded when no k up to ``budget`` works or the state cap
    is hit.
    """
    if mode not in ("black", "bw"):
        raise ValueError(f"unknown mode {mode!r}")
    limit = 24 if mode == "black" else 20
    if dag.n > limit:
        raise BudgetExceeded(f"{mode} search supports at most {limit} vertices")
    cap = max_states if max_states is not None else state_cap()
    budget = dag.n + 1 if budget is None else budget
    explored = 0
    for k in range(1, budget + 1):
        w, cnt = _search(dag, mode == "bw", k, cap)
        explored += cnt
        if w is not None:
            return PriceResult(mode, k, explored, w)
    raise BudgetExceeded(f"no complete {mode} pebbling with at most {budget} pebbles")
