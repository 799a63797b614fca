"""Batching heuristics and the serpentine distance estimator.

Both heuristics take a distance estimator, a callable from a frozenset of
pick vertices to a route length, so they can run against the serpentine
estimate (fast, the experimental setup) or against the exact routing
oracle (for apples-to-apples comparisons on tiny instances).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable

from .errors import UnsupportedFamilyError, ValidationError
from .instance import Instance
from .layout import PickingGraph, build_graph
from .sshape import s_shape_candidates

Estimator = Callable[[frozenset], float]


@dataclass(frozen=True)
class Batching:
    """A capacity-feasible partition of the orders."""

    batches: tuple[frozenset[int], ...]

    def as_lists(self) -> list[list[int]]:
        return [sorted(b) for b in self.batches]


def validate_batching(instance: Instance, batching: Batching) -> None:
    seen: set[int] = set()
    sizes = {o.id: o.size for o in instance.orders}
    for batch in batching.batches:
        if not batch:
            raise ValidationError("empty batch")
        load = sum(sizes[o] for o in batch)
        if load > instance.capacity:
            raise ValidationError("batch exceeds capacity")
        if batch & seen:
            raise ValidationError("order batched twice")
        seen |= batch
    if seen != set(instance.order_ids):
        raise ValidationError("batching does not cover all orders")
    lower = math.ceil(sum(sizes.values()) / instance.capacity)
    if len(batching.batches) < lower:
        raise ValidationError("batch count below the bin-packing lower bound")


def _canonical(batches: Iterable[frozenset]) -> tuple[frozenset, ...]:
    return tuple(sorted((frozenset(b) for b in batches), key=min))


def s_shape_estimate(graph: PickingGraph, picks: Iterable[int]):
    """Serpentine route length estimate for one batch of picks.

    Empty pick sets cost zero (no departure is counted in estimation
    mode).  Single-block layouts use the closed form: one vertical
    traversal per picked subaisle, one more if their number is odd, plus
    twice the distance to the rightmost picked aisle.  Two-block layouts
    take the cheapest constructed serpentine route.
    """
    picks = frozenset(picks)
    if not picks:
        return 0
    layout = graph.layout
    subs = sorted({graph.subaisle_of(v) for v in picks})
    if None in subs:
        raise ValidationError("picks must be picking locations")
    if layout.n_blocks == 1:
        vertical = (len(subs) + (len(subs) % 2)) * layout.subaisle_length
        rightmost = max(graph.subaisles[i].aisle for i in subs)
        return vertical + 2 * rightmost * layout.aisle_spacing
    if layout.n_blocks == 2:
        n = layout.n_aisles
        K1 = [i for i in subs if i < n]
        K2 = [i for i in subs if i >= n]
        routes = s_shape_candidates(graph, K1, K2)
        return min(r.total_length for r in routes)
    raise UnsupportedFamilyError("serpentine estimation supports 1- and 2-block layouts")


def make_s_shape_estimator(graph: PickingGraph) -> Estimator:
    cache: dict[frozenset, float] = {}

    def estimate(picks: frozenset):
        value = cache.get(picks)
        if value is None:
            value = s_shape_estimate(graph, picks)
            cache[picks] = value
        return value

    return estimate


def make_oracle_estimator(graph: PickingGraph) -> Estimator:
    from .exact import route_oracle

    cache: dict[frozenset, float] = {}

    def estimate(picks: frozenset):
        if not picks:
            return 0
        value = cache.get(picks)
        if value is None:
            value = route_oracle(graph, picks).length(graph)
            cache[picks] = value
        return value

    return estimate


def _distinct_subaisles(graph: PickingGraph, picks: frozenset) -> int:
    return len({graph.subaisle_of(v) for v in picks})


def seed_batching(instance: Instance, distance_estimator: Estimator = None,
                  graph: PickingGraph = None) -> Batching:
    """Two-phase seed construction.

    Seed rule: the unassigned order spanning the most distinct subaisles
    (ties to the smallest id).  Addition rule: the unassigned order that
    fits and increases the estimated route length the least (ties to the
    smallest id), until nothing fits.
    """
    graph = graph or build_graph(instance.layout)
    estimate = distance_estimator or make_s_shape_estimator(graph)
    picks = instance.all_pick_vertices(graph)
    sizes = {o.id: o.size for o in instance.orders}

    remaining = sorted(instance.order_ids)
    batches: list[frozenset[int]] = []
    while remaining:
        seed = max(remaining, key=lambda o: (_distinct_subaisles(graph, picks[o]), -o))
        batch = [seed]
        load = sizes[seed]
        batch_picks = picks[seed]
        remaining.remove(seed)
        while True:
            candidates = [o for o in remaining if load + sizes[o] <= instance.capacity]
            if not candidates:
                break
            base = estimate(batch_picks)
            best = min(candidates,
                       key=lambda o: (estimate(batch_picks | picks[o]) - base, o))
            batch.append(best)
            load += sizes[best]
            batch_picks = batch_picks | picks[best]
            remaining.remove(best)
        batches.append(frozenset(batch))
    result = Batching(_canonical(batches))
    validate_batching(instance, result)
    return result


def cw2_batching(instance: Instance, distance_estimator: Estimator = None,
                 graph: PickingGraph = None) -> Batching:
    """Savings batching, recomputing variant.

    Savings of merging two batches: the sum of their separate estimated
    lengths minus the estimate of the merged pick set.  The best strictly
    positive feasible merge is applied and savings are recomputed against
    the merged batches until no improving merge remains.  Ties break on
    the smallest (min order id, min order id) pair.
    """
    graph = graph or build_graph(instance.layout)
    estimate = distance_estimator or make_s_shape_estimator(graph)
    picks = instance.all_pick_vertices(graph)
    sizes = {o.id: o.size for o in instance.orders}

    batches: list[frozenset[int]] = [frozenset([o]) for o in sorted(instance.order_ids)]

    def batch_picks(batch: frozenset) -> frozenset:
        out: frozenset = frozenset()
        for o in batch:
            out |= picks[o]
        return out

    def load(batch: frozenset) -> int:
        return sum(sizes[o] for o in batch)

    while True:
        best = None
        for i in range(len(batches)):
            for j in range(i + 1, len(batches)):
                a, b = batches[i], batches[j]
                if load(a) + load(b) > instance.capacity:
                    continue
                saving = (estimate(batch_picks(a)) + estimate(batch_picks(b))
                          - estimate(batch_picks(a) | batch_picks(b)))
                key = (-saving, min(a), min(b))
                if saving > 0 and (best is None or key < best[0]):
                    best = (key, i, j)
        if best is None:
            break
        _, i, j = best
        merged = batches[i] | batches[j]
        batches = [b for k, b in enumerate(batches) if k not in (i, j)]
        batches.append(merged)
        batches.sort(key=min)
    result = Batching(_canonical(batches))
    validate_batching(instance, result)
    return result
