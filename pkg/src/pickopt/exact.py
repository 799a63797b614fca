"""Desk-scale exact solvers used as ground-truth oracles.

The routing oracle enumerates every edge multiplicity vector in
``{0,1,2}^|E|`` (each directed arc is traversed at most once by an optimal
walk, so undirected multiplicity 2 suffices), keeps the vectors with even
degrees everywhere, and answers minimum-walk queries by masking the
surviving vectors.  The enumeration is bounded at ``|E| <= 14`` and the
bound is enforced, never silently relaxed.

Ties are always broken by the lexicographically smallest multiplicity
vector so results are reproducible byte for byte.
"""

from __future__ import annotations

import json
import math
import weakref
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

from .errors import OracleSizeError, UnsupportedFamilyError, ValidationError
from .instance import Instance
from .layout import PickingGraph, build_graph
from .sshape import SShapeRoute, evaluate_s_shape, s_shape_candidates

MAX_ORACLE_EDGES = 14

FORMAT_SOLUTION = "pickopt-solution-v1"


@dataclass(frozen=True)
class Walk:
    """Closed-walk support of one picker: edge id -> multiplicity in {1,2}."""

    picker: int
    edge_mult: tuple[tuple[int, int], ...]

    @property
    def mult(self) -> dict[int, int]:
        return dict(self.edge_mult)

    def length(self, graph: PickingGraph):
        return sum(graph.edge_length[e] * m for e, m in self.edge_mult)

    def visited(self, graph: PickingGraph) -> frozenset[int]:
        out = set()
        for e, m in self.edge_mult:
            if m:
                u, v = graph.edges[e]
                out.add(u)
                out.add(v)
        return frozenset(out)

    def validate(self, graph: PickingGraph, required: frozenset[int] = frozenset()) -> None:
        degree = [0] * graph.n_vertices
        for e, m in self.edge_mult:
            if m not in (1, 2):
                raise ValidationError(f"walk multiplicity {m} out of range on edge {e}")
            u, v = graph.edges[e]
            degree[u] += m
            degree[v] += m
        if any(d % 2 for d in degree):
            raise ValidationError("walk has an odd-degree vertex, not a closed walk")
        if not self.edge_mult:
            raise ValidationError("walk is empty, pickers must depart from the origin")
        if degree[graph.origin] == 0:
            raise ValidationError("walk does not touch the origin")
        # connectivity of the support, starting from the origin
        support = {e for e, m in self.edge_mult if m}
        seen = {graph.origin}
        stack = [graph.origin]
        while stack:
            u = stack.pop()
            for v, eid in graph.adjacency[u]:
                if eid in support and v not in seen:
                    seen.add(v)
                    stack.append(v)
        for e in support:
            u, v = graph.edges[e]
            if u not in seen or v not in seen:
                raise ValidationError("walk support is disconnected from the origin")
        missing = required - self.visited(graph)
        if missing:
            raise ValidationError(f"walk misses required locations {sorted(missing)}")


@dataclass(frozen=True)
class Solution:
    """Batching plus one walk per picker; total is the summed walk length."""

    batching: tuple[tuple[int, ...], ...]
    walks: tuple[Walk, ...]
    total: float

    def picker_of(self, order_id: int) -> int:
        for t, orders in enumerate(self.batching):
            if order_id in orders:
                return t
        raise ValidationError(f"order {order_id} not batched")


def validate_solution(instance: Instance, graph: PickingGraph, solution: Solution) -> None:
    if len(solution.batching) != len(solution.walks):
        raise ValidationError("solution needs one walk per picker")
    seen: set[int] = set()
    for t, orders in enumerate(solution.batching):
        load = 0
        required = set()
        for oid in orders:
            order = instance.order_by_id(oid)
            if oid in seen:
                raise ValidationError(f"order {oid} assigned twice")
            seen.add(oid)
            load += order.size
            required |= instance.pick_vertices(graph, order)
        if load > instance.capacity:
            raise ValidationError(f"picker {t} exceeds capacity")
        solution.walks[t].validate(graph, frozenset(required))
    if seen != set(instance.order_ids):
        raise ValidationError("solution does not batch every order")
    total = sum(w.length(graph) for w in solution.walks)
    if total != solution.total:
        raise ValidationError("solution total does not equal the walk length sum")


# -- solution files ---------------------------------------------------------


def solution_to_dict(solution: Solution, graph: PickingGraph) -> dict:
    batches = []
    for t, orders in enumerate(solution.batching):
        walk = solution.walks[t]
        batches.append({
            "picker": t,
            "orders": list(orders),
            "walk": [
                {"u": graph.edges[e][0], "v": graph.edges[e][1], "count": m}
                for e, m in walk.edge_mult
            ],
            "length": walk.length(graph),
        })
    return {"format": FORMAT_SOLUTION, "total": solution.total, "batches": batches}


def save_solution(solution: Solution, graph: PickingGraph, path) -> None:
    doc = solution_to_dict(solution, graph)
    Path(path).write_bytes((json.dumps(doc, indent=2, sort_keys=True) + "\n").encode("ascii"))


def load_solution(path, graph: PickingGraph) -> Solution:
    doc = json.loads(Path(path).read_text())
    if doc.get("format") != FORMAT_SOLUTION:
        raise ValidationError(f"format: expected {FORMAT_SOLUTION!r}")
    walks = []
    batching = []
    for bdoc in sorted(doc["batches"], key=lambda b: b["picker"]):
        mult: dict[int, int] = {}
        for entry in bdoc["walk"]:
            eid = graph.edge_id(entry["u"], entry["v"])
            mult[eid] = mult.get(eid, 0) + entry["count"]
        walks.append(Walk(bdoc["picker"], tuple(sorted(mult.items()))))
        batching.append(tuple(bdoc["orders"]))
    return Solution(tuple(batching), tuple(walks), doc["total"])


# -- the enumeration engine --------------------------------------------------


class WalkSpace:
    """All even-degree multiplicity vectors of a small picking graph."""

    def __init__(self, graph: PickingGraph):
        m = len(graph.edges)
        if m > MAX_ORACLE_EDGES:
            raise OracleSizeError(
                f"|E| = {m} exceeds the desk-scale oracle bound "
                f"{MAX_ORACLE_EDGES} (3^|E| enumeration)")
        self.graph = graph
        self.n_edges = m

        lengths = np.array(graph.edge_length, dtype=np.float64)
        self._integral = all(float(x).is_integer() for x in graph.edge_length)
        if self._integral:
            lengths = lengths.astype(np.int64)

        inc = np.zeros((m, graph.n_vertices), dtype=np.int16)
        for eid, (u, v) in enumerate(graph.edges):
            inc[eid, u] = 1
            inc[eid, v] = 1

        powers = 3 ** np.arange(m - 1, -1, -1, dtype=np.int64)
        total = 3 ** m
        chunk = 1 << 18
        kept = []
        for start in range(0, total, chunk):
            idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
            digits = ((idx[:, None] // powers) % 3).astype(np.int8)
            parity = (digits & 1).astype(np.int16) @ inc
            even = ~(parity & 1).any(axis=1)
            if even.any():
                kept.append(digits[even])
        self.mult = np.concatenate(kept) if kept else np.zeros((0, m), dtype=np.int8)
        self.lengths = self.mult.astype(lengths.dtype) @ lengths

        bits = (1 << np.arange(m, dtype=np.int64))
        smask = ((self.mult > 0) * bits).sum(axis=1)
        supports, inverse = np.unique(smask, return_inverse=True)
        sup_ok = np.zeros(len(supports), dtype=bool)
        sup_visited = np.zeros(len(supports), dtype=np.int64)
        for k, mask in enumerate(supports):
            edges = [e for e in range(m) if (int(mask) >> e) & 1]
            if not edges:
                continue
            visited = 0
            adj: dict[int, list[int]] = {}
            for e in edges:
                u, v = graph.edges[e]
                visited |= (1 << u) | (1 << v)
                adj.setdefault(u, []).append(v)
                adj.setdefault(v, []).append(u)
            if graph.origin not in adj:
                continue
            seen = {graph.origin}
            stack = [graph.origin]
            while stack:
                u = stack.pop()
                for v in adj[u]:
                    if v not in seen:
                        seen.add(v)
                        stack.append(v)
            sup_ok[k] = all(u in seen for u in adj)
            sup_visited[k] = visited
        self.ok = sup_ok[inverse]
        self.visited = sup_visited[inverse]

    # -- queries -----------------------------------------------------------

    def query(self, required: Iterable[int], mask: Optional[np.ndarray] = None) -> int:
        req_bits = 0
        for v in required:
            if not (0 <= v < self.graph.n_vertices):
                raise ValidationError(f"required vertex {v} not in graph")
            req_bits |= 1 << v
        feasible = self.ok & ((self.visited & req_bits) == req_bits)
        if mask is not None:
            feasible = feasible & mask
        idxs = np.flatnonzero(feasible)
        if idxs.size == 0:
            raise ValidationError("no feasible walk covers the required locations")
        j = idxs[int(np.argmin(self.lengths[idxs]))]
        return int(j)

    def walk(self, index: int, picker: int = 0) -> Walk:
        row = self.mult[index]
        pairs = tuple((e, int(row[e])) for e in range(self.n_edges) if row[e])
        return Walk(picker, pairs)

    def length(self, index: int):
        value = self.lengths[index]
        return int(value) if self._integral else float(value)

    # -- restriction masks ---------------------------------------------------

    def mask_no_reversal(self) -> np.ndarray:
        """Walks where every entered subaisle is traversed completely."""
        ok = np.ones(len(self.mult), dtype=bool)
        for sub in self.graph.subaisles:
            cols = list(sub.edge_ids)
            block = self.mult[:, cols]
            ok &= (block == block[:, :1]).all(axis=1)
        return ok

    def mask_single_traversal(self, exempt: frozenset[int] = frozenset()) -> np.ndarray:
        """No subaisle (outside ``exempt``) is fully traversed twice."""
        bad = np.zeros(len(self.mult), dtype=bool)
        for sub in self.graph.subaisles:
            if sub.index in exempt:
                continue
            cols = list(sub.edge_ids)
            bad |= (self.mult[:, cols] == 2).all(axis=1)
        return ~bad

    def mask_no_artificial_uturn(self) -> np.ndarray:
        """No walk turns around at an artificial vertex it uses for nothing else."""
        bad = np.zeros(len(self.mult), dtype=bool)

        def corner(vertex: int, chain_edge: int):
            others = [eid for _, eid in self.graph.adjacency[vertex] if eid != chain_edge]
            here = self.mult[:, chain_edge] == 2
            if others:
                here = here & (self.mult[:, others] == 0).all(axis=1)
            return here

        for sub in self.graph.subaisles:
            bad |= corner(sub.tail, sub.edge_ids[-1])
            if sub.block >= 1:
                bad |= corner(sub.head, sub.edge_ids[0])
        return ~bad


_space_cache: "weakref.WeakKeyDictionary[PickingGraph, WalkSpace]" = weakref.WeakKeyDictionary()


def walk_space(graph: PickingGraph) -> WalkSpace:
    space = _space_cache.get(graph)
    if space is None:
        space = WalkSpace(graph)
        _space_cache[graph] = space
    return space


def route_oracle(graph: PickingGraph, required: Iterable[int],
                 mask: Optional[np.ndarray] = None, picker: int = 0) -> Walk:
    """Minimum-length closed walk from the origin covering ``required``.

    ``required`` may be empty; the result is then the minimal departure
    walk (cheapest out-and-back from the origin).
    """
    required = frozenset(required)
    for v in required:
        if v >= graph.n_vertices or graph.is_artificial(v):
            raise ValidationError(f"required vertex {v} is not a picking location")
    space = walk_space(graph)
    return space.walk(space.query(required, mask), picker)


# -- batching enumeration ----------------------------------------------------


def capacity_feasible_partitions(order_ids: Sequence[int], sizes: dict[int, int],
                                 capacity: int, max_blocks: int) -> Iterator[tuple]:
    """All partitions into at most ``max_blocks`` capacity-feasible batches.

    Orders are placed in id order, so blocks appear sorted by their smallest
    order id: the canonical representative of each partition orbit.
    """
    order_ids = sorted(order_ids)
    parts: list[list[int]] = []
    loads: list[int] = []

    def rec(k: int) -> Iterator[tuple]:
        if k == len(order_ids):
            yield tuple(tuple(p) for p in parts)
            return
        o = order_ids[k]
        for i in range(len(parts)):
            if loads[i] + sizes[o] <= capacity:
                parts[i].append(o)
                loads[i] += sizes[o]
                yield from rec(k + 1)
                parts[i].pop()
                loads[i] -= sizes[o]
        if len(parts) < max_blocks:
            parts.append([o])
            loads.append(sizes[o])
            yield from rec(k + 1)
            parts.pop()
            loads.pop()

    yield from rec(0)


MAX_EXACT_ORDERS = 6


def _solve_by_enumeration(instance: Instance, graph: Optional[PickingGraph],
                          mask_fn, threads: Optional[int]) -> Solution:
    if len(instance.orders) > MAX_EXACT_ORDERS:
        raise OracleSizeError(
            f"{len(instance.orders)} orders exceed the exact-solver bound "
            f"{MAX_EXACT_ORDERS} (partition enumeration)")
    graph = graph or build_graph(instance.layout)
    space = walk_space(graph)
    mask = mask_fn(space) if mask_fn is not None else None

    picks = instance.all_pick_vertices(graph)
    sizes = {o.id: o.size for o in instance.orders}
    T = instance.pickers

    route_memo: dict[frozenset, int] = {}

    def route(batch: tuple[int, ...]) -> int:
        req = frozenset().union(*(picks[o] for o in batch))
        idx = route_memo.get(req)
        if idx is None:
            idx = space.query(req, mask)
            route_memo[req] = idx
        return idx

    departure_idx = space.query(frozenset(), mask)
    departure_len = space.length(departure_idx)

    def evaluate(partition):
        cost = sum(space.length(route(batch)) for batch in partition)
        cost += (T - len(partition)) * departure_len
        return cost, partition

    partitions = list(capacity_feasible_partitions(
        list(instance.order_ids), sizes, instance.capacity, T))
    if not partitions:
        raise ValidationError("no capacity-feasible batching exists for this picker count")

    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            scored = list(pool.map(evaluate, partitions))
    else:
        scored = [evaluate(p) for p in partitions]
    best_cost, best_partition = min(scored, key=lambda item: (item[0], item[1]))

    walks = []
    batching = []
    for t in range(T):
        if t < len(best_partition):
            batch = best_partition[t]
            walks.append(space.walk(route(batch), picker=t))
            batching.append(tuple(batch))
        else:
            walks.append(space.walk(departure_idx, picker=t))
            batching.append(())
    total = sum(w.length(graph) for w in walks)
    solution = Solution(tuple(batching), tuple(walks), total)
    validate_solution(instance, graph, solution)
    return solution


def solve_exact(instance: Instance, graph: Optional[PickingGraph] = None,
                threads: Optional[int] = None) -> Solution:
    """Exact optimum by canonical partition enumeration over the oracle."""
    return _solve_by_enumeration(instance, graph, None, threads)


def solve_no_reversal_exact(instance: Instance, graph: Optional[PickingGraph] = None,
                            threads: Optional[int] = None) -> Solution:
    """Exact optimum over walks that fully traverse every entered subaisle."""
    if instance.layout.n_blocks > 2:
        raise UnsupportedFamilyError(
            "no-reversal routing is implemented for 1- and 2-block layouts")
    return _solve_by_enumeration(instance, graph, WalkSpace.mask_no_reversal, threads)


# -- bin packing --------------------------------------------------------------


MAX_EXACT_BINPACK = 20


def first_fit_decreasing(sizes: Sequence[int], capacity: int) -> int:
    bins: list[int] = []
    for s in sorted(sizes, reverse=True):
        for i, load in enumerate(bins):
            if load + s <= capacity:
                bins[i] += s
                break
        else:
            bins.append(s)
    return len(bins)


def bin_pack_exact(sizes: Sequence[int], capacity: int) -> int:
    """Optimal bin count by branch and bound (FFD upper, sum lower bound)."""
    sizes = list(sizes)
    for s in sizes:
        if s > capacity:
            raise ValidationError(f"order of size {s} exceeds capacity {capacity}, infeasible")
        if s < 1:
            raise ValidationError("order sizes must be >= 1")
    if not sizes:
        return 0
    lower = math.ceil(sum(sizes) / capacity)
    upper = first_fit_decreasing(sizes, capacity)
    if upper == lower:
        return upper
    if len(sizes) > MAX_EXACT_BINPACK:
        raise OracleSizeError(
            f"{len(sizes)} sizes exceed the exact bin-packing bound {MAX_EXACT_BINPACK}")

    items = sorted(sizes, reverse=True)
    best = upper

    def dfs(k: int, bins: list[int]) -> None:
        nonlocal best
        if best == lower:
            return
        if k == len(items):
            best = min(best, len(bins))
            return
        if len(bins) >= best:
            return
        item = items[k]
        tried = set()
        for i in range(len(bins)):
            if bins[i] + item <= capacity and bins[i] not in tried:
                tried.add(bins[i])
                bins[i] += item
                dfs(k + 1, bins)
                bins[i] -= item
        if len(bins) + 1 < best:
            bins.append(item)
            dfs(k + 1, bins)
            bins.pop()

    dfs(0, [])
    return best


def minimal_departure_length(graph: PickingGraph):
    """Length of the cheapest out-and-back from the origin."""
    return 2 * min(graph.edge_length[eid] for _, eid in graph.adjacency[graph.origin])


def batching_to_solution(instance: Instance, graph: PickingGraph,
                         batches: Sequence[Iterable[int]]) -> Solution:
    """Route every batch of a (possibly heuristic) batching with the oracle.

    A heuristic may use more pickers than the bin-packing minimum; any
    spare pickers up to the instance count get the minimal departure walk.
    """
    space = walk_space(graph)
    picks = instance.all_pick_vertices(graph)
    ordered = sorted((tuple(sorted(b)) for b in batches), key=lambda b: b[0])
    walks = []
    batching = []
    for t, batch in enumerate(ordered):
        req = frozenset().union(*(picks[o] for o in batch))
        walks.append(space.walk(space.query(req), picker=t))
        batching.append(batch)
    for t in range(len(ordered), instance.pickers):
        walks.append(space.walk(space.query(frozenset()), picker=t))
        batching.append(())
    total = sum(w.length(graph) for w in walks)
    solution = Solution(tuple(batching), tuple(walks), total)
    validate_solution(instance, graph, solution)
    return solution


__all__ = [
    "MAX_ORACLE_EDGES", "MAX_EXACT_ORDERS", "Walk", "Solution", "SShapeRoute",
    "WalkSpace", "walk_space", "route_oracle", "solve_exact",
    "solve_no_reversal_exact", "bin_pack_exact", "first_fit_decreasing",
    "capacity_feasible_partitions", "evaluate_s_shape", "s_shape_candidates",
    "validate_solution", "solution_to_dict", "save_solution", "load_solution",
    "minimal_departure_length", "batching_to_solution",
]
