"""Problem instances: orders, generation, JSON persistence.

Instance files use the ``pickopt-instance-v1`` JSON schema::

    {
      "format": "pickopt-instance-v1",
      "layout": {"aisles": 2, "blocks": 1, "locs_per_subaisle": 2,
                 "loc_spacing": 1, "aisle_spacing": 2},
      "capacity": 8,
      "pickers": 2,                      # optional, defaults to bin packing
      "orders": [
        {"id": 0, "size": 3,
         "picks": [{"aisle": 0, "block": 0, "slot": 1, "side": 0}]}
      ]
    }

Generation follows a two-level draw: the number of picks of an order is
``1 + Poisson(delta / 5)`` (so the mean grows with the profile parameter
delta), pick coordinates are sampled uniformly without replacement over
all slots, and the order size is ``ceil(picks / 2)`` baskets clamped to
the trolley capacity.  Everything is driven by a single seeded generator,
so instances are reproducible bit for bit.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .layout import PickingGraph, WarehouseLayout, build_graph

FORMAT_INSTANCE = "pickopt-instance-v1"

DEFAULT_CAPACITY = 8
PICKS_PER_BASKET = 2


@dataclass(frozen=True)
class Pick:
    aisle: int
    block: int
    slot: int
    side: int

    def as_dict(self) -> dict:
        return {"aisle": self.aisle, "block": self.block, "slot": self.slot, "side": self.side}


@dataclass(frozen=True)
class Order:
    id: int
    size: int
    picks: tuple[Pick, ...]


@dataclass(frozen=True)
class Instance:
    layout: WarehouseLayout
    orders: tuple[Order, ...]
    capacity: int
    pickers: int

    def __post_init__(self):
        if self.capacity < 1:
            raise ValidationError("capacity must be >= 1")
        if self.pickers < 1:
            raise ValidationError("pickers must be >= 1")
        seen = set()
        for o in self.orders:
            if o.id in seen:
                raise ValidationError(f"duplicate order id {o.id}")
            seen.add(o.id)
            if o.size < 1:
                raise ValidationError(f"orders[{o.id}]: size must be >= 1")
            if o.size > self.capacity:
                raise ValidationError(f"orders[{o.id}]: order exceeds capacity")
            if not o.picks:
                raise ValidationError(f"orders[{o.id}]: order has no picks")

    @property
    def order_ids(self) -> tuple[int, ...]:
        return tuple(o.id for o in self.orders)

    def order_by_id(self, oid: int) -> Order:
        for o in self.orders:
            if o.id == oid:
                return o
        raise ValidationError(f"unknown order id {oid}")

    def pick_vertices(self, graph: PickingGraph, order: Order) -> frozenset[int]:
        return frozenset(
            graph.slot_vertex(p.aisle, p.block, p.slot, p.side) for p in order.picks)

    def all_pick_vertices(self, graph: PickingGraph) -> dict[int, frozenset[int]]:
        return {o.id: self.pick_vertices(graph, o) for o in self.orders}


def generate_instance(layout: WarehouseLayout, n_orders: int, delta: int, seed: int,
                      capacity: int = DEFAULT_CAPACITY) -> Instance:
    """Generate a random instance, deterministic for a fixed seed."""
    if n_orders < 1:
        raise ValidationError("n_orders must be >= 1")
    if delta < 1:
        raise ValidationError("delta must be >= 1")
    rng = np.random.default_rng(seed)

    n, q, m = layout.n_aisles, layout.n_blocks, layout.locs_per_subaisle
    n_slots = n * q * m * 2
    orders = []
    for oid in range(n_orders):
        n_picks = 1 + int(rng.poisson(delta / 5.0))
        n_picks = min(n_picks, n_slots)
        chosen = rng.choice(n_slots, size=n_picks, replace=False)
        picks = []
        for code in sorted(int(c) for c in chosen):
            side = code % 2
            slot = (code // 2) % m
            aisle = (code // (2 * m)) % n
            block = code // (2 * m * n)
            picks.append(Pick(aisle, block, slot, side))
        size = min(capacity, max(1, math.ceil(n_picks / PICKS_PER_BASKET)))
        orders.append(Order(oid, size, tuple(picks)))

    from .exact import bin_pack_exact

    pickers = bin_pack_exact([o.size for o in orders], capacity)
    return Instance(layout=layout, orders=tuple(orders), capacity=capacity, pickers=pickers)


# -- JSON persistence ----------------------------------------------------


def instance_to_dict(instance: Instance, include_pickers: bool = True) -> dict:
    lay = instance.layout
    doc = {
        "format": FORMAT_INSTANCE,
        "layout": {
            "aisles": lay.n_aisles,
            "blocks": lay.n_blocks,
            "locs_per_subaisle": lay.locs_per_subaisle,
            "loc_spacing": lay.loc_spacing,
            "aisle_spacing": lay.aisle_spacing,
        },
        "capacity": instance.capacity,
        "orders": [
            {"id": o.id, "size": o.size, "picks": [p.as_dict() for p in o.picks]}
            for o in instance.orders
        ],
    }
    if include_pickers:
        doc["pickers"] = instance.pickers
    return doc


def canonical_json_bytes(doc: dict) -> bytes:
    return (json.dumps(doc, indent=2, sort_keys=True) + "\n").encode("ascii")


def save_instance(instance: Instance, path) -> None:
    Path(path).write_bytes(canonical_json_bytes(instance_to_dict(instance)))


def _expect(doc: dict, key: str, types, where: str):
    if key not in doc:
        raise ValidationError(f"{where}.{key}: missing field")
    value = doc[key]
    if not isinstance(value, types) or isinstance(value, bool):
        raise ValidationError(f"{where}.{key}: wrong type {type(value).__name__}")
    return value


def instance_from_dict(doc: dict) -> Instance:
    if not isinstance(doc, dict):
        raise ValidationError("instance: not a JSON object")
    if doc.get("format") != FORMAT_INSTANCE:
        raise ValidationError(f"format: expected {FORMAT_INSTANCE!r}, got {doc.get('format')!r}")
    lay_doc = _expect(doc, "layout", dict, "instance")
    layout = WarehouseLayout(
        n_aisles=_expect(lay_doc, "aisles", int, "layout"),
        n_blocks=_expect(lay_doc, "blocks", int, "layout"),
        locs_per_subaisle=_expect(lay_doc, "locs_per_subaisle", int, "layout"),
        loc_spacing=_expect(lay_doc, "loc_spacing", (int, float), "layout"),
        aisle_spacing=_expect(lay_doc, "aisle_spacing", (int, float), "layout"),
    )
    capacity = _expect(doc, "capacity", int, "instance")
    orders_doc = _expect(doc, "orders", list, "instance")
    if not orders_doc:
        raise ValidationError("orders: must not be empty")

    orders = []
    for k, odoc in enumerate(orders_doc):
        where = f"orders[{k}]"
        if not isinstance(odoc, dict):
            raise ValidationError(f"{where}: not an object")
        oid = _expect(odoc, "id", int, where)
        size = _expect(odoc, "size", int, where)
        if size > capacity:
            raise ValidationError(f"{where}.size: order exceeds capacity")
        picks_doc = _expect(odoc, "picks", list, where)
        picks = []
        for j, pdoc in enumerate(picks_doc):
            pwhere = f"{where}.picks[{j}]"
            if not isinstance(pdoc, dict):
                raise ValidationError(f"{pwhere}: not an object")
            pick = Pick(
                aisle=_expect(pdoc, "aisle", int, pwhere),
                block=_expect(pdoc, "block", int, pwhere),
                slot=_expect(pdoc, "slot", int, pwhere),
                side=_expect(pdoc, "side", int, pwhere),
            )
            if not (0 <= pick.aisle < layout.n_aisles):
                raise ValidationError(f"{pwhere}.aisle: coordinate out of range")
            if not (0 <= pick.block < layout.n_blocks):
                raise ValidationError(f"{pwhere}.block: coordinate out of range")
            if not (0 <= pick.slot < layout.locs_per_subaisle):
                raise ValidationError(f"{pwhere}.slot: coordinate out of range")
            if pick.side not in (0, 1):
                raise ValidationError(f"{pwhere}.side: coordinate out of range")
            picks.append(pick)
        orders.append(Order(oid, size, tuple(picks)))

    if "pickers" in doc:
        pickers = _expect(doc, "pickers", int, "instance")
    else:
        from .exact import bin_pack_exact

        pickers = bin_pack_exact([o.size for o in orders], capacity)
    return Instance(layout=layout, orders=tuple(orders), capacity=capacity, pickers=pickers)


def load_instance(path) -> Instance:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"invalid JSON in {path}: {exc}") from exc
    return instance_from_dict(doc)


def instance_graph(instance: Instance) -> PickingGraph:
    return build_graph(instance.layout)
