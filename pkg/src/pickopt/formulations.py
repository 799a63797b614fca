"""Builders for every integer programming formulation of the problem.

Model kinds
-----------

========  ==================================================================
P_basic   arc-space batching + routing model with a lazy connectivity family
P_A       P_basic plus the subaisle cuts
P_G       reduced-graph connectivity via gamma variables (lazy family on
          the reduced graph) plus the subaisle cuts
P_F       compact variant of P_G: connectivity by multicommodity flows
P_U       P_G restricted by the no-reversal equalities
P_U1      undirected TSP model on the single-block auxiliary graph
P_U2      undirected TSP model on the two-block auxiliary graph
========  ==================================================================

Constraint groups carry short stable labels (``bs4``, ``sub5``, ``impf8``,
``tspo5`` and so on) so tests and the CLI can count rows per family; lazy
exponential families are declared with zero initial rows and filled by
separation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .errors import UnsupportedFamilyError, ValidationError, VariantMismatchError
from .instance import Instance
from .layout import (SINGLE_BLOCK, TWO_BLOCK, AuxiliaryGraph, PickingGraph,
                     build_auxiliary_graph)
from .model import BINARY, CONTINUOUS, EQ, GE, LE, LinearModel

P_BASIC = "P_basic"
P_A = "P_A"
P_G = "P_G"
P_F = "P_F"
P_U = "P_U"
P_U1 = "P_U1"
P_U2 = "P_U2"

ARC_KINDS = (P_BASIC, P_A, P_G, P_F, P_U)
TSP_KINDS = (P_U1, P_U2)
ALL_KINDS = ARC_KINDS + TSP_KINDS

GROUP_DESCRIPTIONS = {
    "bs1": "every picker departs from the origin",
    "bs2": "assigned picks are left by an arc",
    "bs3": "arc use marks the vertex visited",
    "bs4": "connectivity (lazy, exponential)",
    "bs5": "arc flow conservation",
    "bs6": "each order assigned to exactly one picker",
    "bs7": "trolley capacity",
    "sub1": "alpha chain monotone from the north",
    "sub2": "alpha forces the downward arc",
    "sub3": "beta chain monotone from the south",
    "sub4": "beta forces the upward arc",
    "sub5": "cover: alpha or beta at every assigned pick",
    "impf1": "every picker departs from the origin",
    "impf2": "assigned picks are left by an arc",
    "impf3": "arc use marks the artificial vertex visited",
    "impf4": "gamma equals x on westbound cross-aisle arcs",
    "impf5": "gamma equals x on eastbound cross-aisle arcs",
    "impf6_5": "downward gamma forces alpha at the last location",
    "impf6": "downward gamma forces the last downward arc",
    "impf7_5": "upward gamma forces beta at the first location",
    "impf7": "upward gamma forces the first upward arc",
    "impf8": "reduced-graph connectivity (lazy, exponential)",
    "impf9": "arc flow conservation",
    "impf10": "each order assigned to exactly one picker",
    "impf11": "trolley capacity",
    "impcf1": "commodity leaves its source artificial vertex",
    "impcf2": "commodity flow conservation",
    "impcf3": "commodity arrives at the origin",
    "impcf4": "flow only on traversed reduced arcs",
    "aisle_cut": "strengthened connectivity on single subaisles",
    "basic_cut": "strengthened connectivity on order components",
    "sitr": "single traversing restriction",
    "norev1": "no-reversal ties on downward arcs",
    "norev2": "no-reversal ties on upward arcs",
    "avr": "no U-turn at an artificial vertex without onward arcs",
    "col_fix": "symmetry: order can only seed its own or earlier picker",
    "col_link": "symmetry: picker used only after its predecessor",
    "tspo0": "departure uses a graph edge",
    "tspo1": "origin degree is exactly two",
    "tspo2": "picked subaisles are traversed",
    "tspo3": "degree with the parallel edge at the first subaisle tail",
    "tspo4": "tour degree equalities",
    "tspo5": "two-connectivity (lazy, exponential)",
    "tspo6": "each order assigned to exactly one picker",
    "tspo7": "trolley capacity",
    "tspt0": "departure uses a movement edge",
    "tspt1": "origin degree is exactly two",
    "tspt2": "picked subaisles are traversed",
    "tspt3": "tour degree equalities",
    "tspt4": "two-connectivity (lazy, exponential)",
    "tspt5": "each order assigned to exactly one picker",
    "tspt6": "trolley capacity",
    "less2con": "second cross aisle passed at most twice",
}


@dataclass(frozen=True)
class ModelOptions:
    """Optional row families layered on top of a formulation kind."""

    subaisle_cuts: bool = False
    aisle_cuts: bool = False
    basic_cuts: bool = False
    single_traversing: bool = False
    artificial_vertex_reversal: bool = False
    column_inequalities: bool = False
    cross_aisle_bound: bool = False

    def enabled(self) -> tuple[str, ...]:
        return tuple(name for name in (
            "subaisle_cuts", "aisle_cuts", "basic_cuts", "single_traversing",
            "artificial_vertex_reversal", "column_inequalities", "cross_aisle_bound")
            if getattr(self, name))


def validate_options(kind: str, options: ModelOptions, instance: Instance) -> None:
    """Enforce the option compatibility matrix."""
    if kind not in ALL_KINDS:
        raise ValidationError(f"unknown formulation kind {kind!r}")
    blocks = instance.layout.n_blocks
    if kind == P_U1 and blocks != 1:
        raise VariantMismatchError("P_U1 requires a single-block layout")
    if kind == P_U2 and blocks != 2:
        raise VariantMismatchError("P_U2 requires a two-block layout")
    if options.cross_aisle_bound and kind != P_U2:
        raise UnsupportedFamilyError("cross_aisle_bound is only defined for P_U2")
    arc_only = ("aisle_cuts", "basic_cuts", "artificial_vertex_reversal", "subaisle_cuts")
    for name in arc_only:
        if getattr(options, name) and kind in TSP_KINDS:
            raise UnsupportedFamilyError(f"{name} is not defined for {kind}")
    if options.single_traversing:
        if kind in TSP_KINDS:
            raise UnsupportedFamilyError("single_traversing is not defined for TSP kinds")
        if blocks > 2:
            raise UnsupportedFamilyError(
                "single traversing constraints are only valid for 1- or 2-block layouts")
        if kind == P_BASIC and not options.subaisle_cuts:
            raise UnsupportedFamilyError(
                "single_traversing needs the alpha/beta variables of the subaisle cuts")


def _has_picks(instance: Instance, graph: PickingGraph, sub_index: int) -> set[int]:
    """Order ids with at least one pick in the subaisle."""
    sub = graph.subaisles[sub_index]
    locs = set(sub.locs)
    out = set()
    for o in instance.orders:
        if locs & instance.pick_vertices(graph, o):
            out.add(o.id)
    return out


# -- arc-space core --------------------------------------------------------


def _declare_arc_core(model: LinearModel, instance: Instance, graph: PickingGraph) -> None:
    T = instance.pickers
    for t in range(T):
        for u, v in graph.arcs():
            pos = model.add_variable(f"x_{t}_{u}_{v}", BINARY, ("x", t, u, v))
            model.set_objective_coeff(pos, graph.arc_length(u, v))
    for t in range(T):
        for v in range(graph.n_vertices):
            model.add_variable(f"y_{t}_{v}", BINARY, ("y", t, v))
    for o in instance.orders:
        for t in range(T):
            model.add_variable(f"z_{o.id}_{t}", BINARY, ("z", o.id, t))


def _arc_core_rows(model: LinearModel, instance: Instance, graph: PickingGraph,
                   labels: dict[str, str], ydef_vertices) -> None:
    """Rows shared by P_basic and P_G, with per-kind group labels."""
    T = instance.pickers
    s = graph.origin
    picks = instance.all_pick_vertices(graph)

    for t in range(T):
        coeffs = [(model.var("x", t, s, v), 1) for v, _ in graph.adjacency[s]]
        model.add_row(f"{labels['depart']}_t{t}", labels["depart"], coeffs, GE, 1)

    for t in range(T):
        for o in instance.orders:
            for u in sorted(picks[o.id]):
                coeffs = [(model.var("x", t, u, v), 1) for v, _ in graph.adjacency[u]]
                coeffs.append((model.var("z", o.id, t), -1))
                model.add_row(f"{labels['cover']}_t{t}_o{o.id}_v{u}",
                              labels["cover"], coeffs, GE, 0)

    for t in range(T):
        for u in ydef_vertices:
            if u == s:
                continue
            for v, _ in graph.adjacency[u]:
                model.add_row(
                    f"{labels['ydef']}_t{t}_v{u}_{v}", labels["ydef"],
                    [(model.var("y", t, u), 1), (model.var("x", t, u, v), -1)], GE, 0)

    for t in range(T):
        for v in range(graph.n_vertices):
            coeffs = [(model.var("x", t, v, u), 1) for u, _ in graph.adjacency[v]]
            coeffs += [(model.var("x", t, u, v), -1) for u, _ in graph.adjacency[v]]
            model.add_row(f"{labels['flow']}_t{t}_v{v}", labels["flow"], coeffs, EQ, 0)

    for o in instance.orders:
        coeffs = [(model.var("z", o.id, t), 1) for t in range(T)]
        model.add_row(f"{labels['assign']}_o{o.id}", labels["assign"], coeffs, EQ, 1)

    for t in range(T):
        coeffs = [(model.var("z", o.id, t), o.size) for o in instance.orders]
        model.add_row(f"{labels['capacity']}_t{t}", labels["capacity"], coeffs,
                      LE, instance.capacity)


def build_basic(instance: Instance, graph: PickingGraph) -> LinearModel:
    """Arc-space model: routing, batching and a lazy connectivity family."""
    model = LinearModel("pickopt_P_basic", kind=P_BASIC)
    _declare_arc_core(model, instance, graph)
    labels = {"depart": "bs1", "cover": "bs2", "ydef": "bs3", "flow": "bs5",
              "assign": "bs6", "capacity": "bs7"}
    _arc_core_rows(model, instance, graph, labels, range(graph.n_vertices))
    model.declare_lazy_group("bs4", GROUP_DESCRIPTIONS["bs4"])
    return model


def build_subaisle_cuts(model: LinearModel, instance: Instance, graph: PickingGraph) -> list:
    """Append the subaisle cut rows, declaring alpha/beta when missing."""
    T = instance.pickers
    for t in range(T):
        for v in graph.picking_vertices:
            if not model.has_var("a", t, v):
                model.add_variable(f"a_{t}_{v}", BINARY, ("a", t, v))
                model.add_variable(f"b_{t}_{v}", BINARY, ("b", t, v))
    rows = []
    picks = instance.all_pick_vertices(graph)
    for t in range(T):
        for sub in graph.subaisles:
            for v in sub.locs[:-1]:
                rows.append(model.add_row(
                    f"sub1_t{t}_v{v}", "sub1",
                    [(model.var("a", t, v), 1), (model.var("a", t, graph.south_of(v)), -1)],
                    GE, 0))
            for v in sub.locs:
                rows.append(model.add_row(
                    f"sub2_t{t}_v{v}", "sub2",
                    [(model.var("x", t, graph.north_of(v), v), 1), (model.var("a", t, v), -1)],
                    GE, 0))
            for v in sub.locs[1:]:
                rows.append(model.add_row(
                    f"sub3_t{t}_v{v}", "sub3",
                    [(model.var("b", t, v), 1), (model.var("b", t, graph.north_of(v)), -1)],
                    GE, 0))
            for v in sub.locs:
                rows.append(model.add_row(
                    f"sub4_t{t}_v{v}", "sub4",
                    [(model.var("x", t, graph.south_of(v), v), 1), (model.var("b", t, v), -1)],
                    GE, 0))
    for t in range(T):
        for o in instance.orders:
            for v in sorted(picks[o.id]):
                rows.append(model.add_row(
                    f"sub5_t{t}_o{o.id}_v{v}", "sub5",
                    [(model.var("a", t, v), 1), (model.var("b", t, v), 1),
                     (model.var("z", o.id, t), -1)],
                    GE, 0))
    return rows


def build_PA(instance: Instance, graph: PickingGraph) -> LinearModel:
    model = build_basic(instance, graph)
    model.name = "pickopt_P_A"
    model.kind = P_A
    build_subaisle_cuts(model, instance, graph)
    return model


def _gamma_rows(model: LinearModel, instance: Instance, graph: PickingGraph) -> None:
    """Declare gamma over the reduced arcs and link it to x, alpha, beta."""
    T = instance.pickers
    for t in range(T):
        for u, v, _, _ in graph.reduced_edges:
            model.add_variable(f"g_{t}_{u}_{v}", BINARY, ("g", t, u, v))
            model.add_variable(f"g_{t}_{v}_{u}", BINARY, ("g", t, v, u))

    for t in range(T):
        for v in graph.artificial_vertices:
            w = graph.q_west(v)
            if w is not None:
                model.add_row(f"impf4_t{t}_v{v}", "impf4",
                              [(model.var("x", t, v, w), 1), (model.var("g", t, v, w), -1)],
                              EQ, 0)
            e = graph.q_east(v)
            if e is not None:
                model.add_row(f"impf5_t{t}_v{v}", "impf5",
                              [(model.var("x", t, v, e), 1), (model.var("g", t, v, e), -1)],
                              EQ, 0)
        for sub in graph.subaisles:
            f, l = sub.head, sub.tail
            n_l = graph.north_of(l)
            s_f = graph.south_of(f)
            model.add_row(f"impf6_5_t{t}_i{sub.index}", "impf6_5",
                          [(model.var("a", t, n_l), 1), (model.var("g", t, f, l), -1)],
                          GE, 0)
            model.add_row(f"impf6_t{t}_i{sub.index}", "impf6",
                          [(model.var("x", t, n_l, l), 1), (model.var("g", t, f, l), -1)],
                          GE, 0)
            model.add_row(f"impf7_5_t{t}_i{sub.index}", "impf7_5",
                          [(model.var("b", t, s_f), 1), (model.var("g", t, l, f), -1)],
                          GE, 0)
            model.add_row(f"impf7_t{t}_i{sub.index}", "impf7",
                          [(model.var("x", t, s_f, f), 1), (model.var("g", t, l, f), -1)],
                          GE, 0)


def build_PG(instance: Instance, graph: PickingGraph) -> LinearModel:
    """Improved formulation: subaisle cuts plus reduced-graph connectivity."""
    model = LinearModel("pickopt_P_G", kind=P_G)
    _declare_arc_core(model, instance, graph)
    build_subaisle_cuts(model, instance, graph)
    labels = {"depart": "impf1", "cover": "impf2", "ydef": "impf3", "flow": "impf9",
              "assign": "impf10", "capacity": "impf11"}
    _arc_core_rows(model, instance, graph, labels, graph.artificial_vertices)
    _gamma_rows(model, instance, graph)
    model.declare_lazy_group("impf8", GROUP_DESCRIPTIONS["impf8"])
    return model


def build_PF(instance: Instance, graph: PickingGraph) -> LinearModel:
    """Compact formulation: connectivity by one flow per artificial vertex."""
    model = build_PG(instance, graph)
    model.name = "pickopt_P_F"
    model.kind = P_F
    del model.lazy_groups["impf8"]

    T = instance.pickers
    reduced_arcs = list(graph.reduced_arcs())
    s = graph.origin
    for t in range(T):
        for v0 in graph.artificial_vertices:
            for u, v in reduced_arcs:
                model.add_variable(f"s_{t}_{v0}_{u}_{v}", CONTINUOUS, ("s", t, v0, u, v))

    for t in range(T):
        for v0 in graph.artificial_vertices:
            out_v0 = [(model.var("s", t, v0, u, v), 1) for u, v in graph.eta_plus([v0])]
            in_v0 = [(model.var("s", t, v0, u, v), -1) for u, v in graph.eta_minus([v0])]
            model.add_row(f"impcf1_t{t}_c{v0}", "impcf1",
                          out_v0 + in_v0 + [(model.var("y", t, v0), -1)], EQ, 0)
            for u in graph.artificial_vertices:
                if u in (s, v0):
                    continue
                out_u = [(model.var("s", t, v0, a, b), 1) for a, b in graph.eta_plus([u])]
                in_u = [(model.var("s", t, v0, a, b), -1) for a, b in graph.eta_minus([u])]
                model.add_row(f"impcf2_t{t}_c{v0}_u{u}", "impcf2", out_u + in_u, EQ, 0)
            out_s = [(model.var("s", t, v0, a, b), 1) for a, b in graph.eta_plus([s])]
            in_s = [(model.var("s", t, v0, a, b), -1) for a, b in graph.eta_minus([s])]
            model.add_row(f"impcf3_t{t}_c{v0}", "impcf3",
                          out_s + in_s + [(model.var("y", t, v0), 1)], EQ, 0)
            for u, v in reduced_arcs:
                model.add_row(f"impcf4_t{t}_c{v0}_{u}_{v}", "impcf4",
                              [(model.var("s", t, v0, u, v), 1), (model.var("g", t, u, v), -1)],
                              LE, 0)
    return model


def build_strengthened_cuts(model: LinearModel, instance: Instance, graph: PickingGraph,
                            family: str) -> list:
    """Aisle cuts (one subaisle per set) or basic cuts (order components)."""
    T = instance.pickers
    rows = []
    if family == "aisle":
        for sub in graph.subaisles:
            order_ids = sorted(_has_picks(instance, graph, sub.index))
            if not order_ids:
                continue
            arcs = graph.delta_plus(sub.locs)
            for o in order_ids:
                for t in range(T):
                    coeffs = [(model.var("x", t, u, v), 1) for u, v in arcs]
                    coeffs.append((model.var("z", o, t), -1))
                    rows.append(model.add_row(
                        f"aisle_cut_t{t}_o{o}_i{sub.index}", "aisle_cut", coeffs, GE, 0))
        return rows
    if family == "basic":
        from .separation import order_components

        for o in instance.orders:
            comps = order_components(graph, instance.pick_vertices(graph, o))
            for k, (vertex_set, contains_origin) in enumerate(comps.components):
                if contains_origin:
                    continue
                arcs = graph.delta_plus(vertex_set)
                for t in range(T):
                    coeffs = [(model.var("x", t, u, v), 1) for u, v in arcs]
                    coeffs.append((model.var("z", o.id, t), -1))
                    rows.append(model.add_row(
                        f"basic_cut_t{t}_o{o.id}_k{k}", "basic_cut", coeffs, GE, 0))
        return rows
    raise ValidationError(f"unknown strengthened-cut family {family!r}")


def build_single_traversing(model: LinearModel, instance: Instance,
                            graph: PickingGraph) -> list:
    """No subaisle is fully traversed both ways; block-2 layouts exempt
    the first subaisle."""
    blocks = instance.layout.n_blocks
    if blocks > 2:
        raise UnsupportedFamilyError(
            "single traversing constraints are only valid for 1- or 2-block layouts")
    exempt: frozenset[int] = frozenset()
    if blocks == 2:
        exempt = frozenset(graph.subaisles[0].locs)
    rows = []
    picks = instance.all_pick_vertices(graph)
    for t in range(instance.pickers):
        for o in instance.orders:
            for v in sorted(picks[o.id]):
                if v in exempt:
                    continue
                rows.append(model.add_row(
                    f"sitr_t{t}_o{o.id}_v{v}", "sitr",
                    [(model.var("a", t, v), 1), (model.var("b", t, v), 1)], LE, 1))
    return rows


def build_no_reversal(model: LinearModel, instance: Instance, graph: PickingGraph) -> list:
    """Tie every vertical arc of a subaisle to one traversal variable per
    direction, so a picker entering a subaisle crosses it completely."""
    rows = []
    for t in range(instance.pickers):
        for sub in graph.subaisles:
            w_dn = model.add_variable(f"w_{t}_{sub.index}_dn", BINARY, ("w", t, sub.index, "dn"))
            w_up = model.add_variable(f"w_{t}_{sub.index}_up", BINARY, ("w", t, sub.index, "up"))
            for v in sub.locs + (sub.tail,):
                rows.append(model.add_row(
                    f"norev1_t{t}_i{sub.index}_v{v}", "norev1",
                    [(model.var("x", t, graph.north_of(v), v), 1), (w_dn, -1)], EQ, 0))
            for v in (sub.head,) + sub.locs:
                rows.append(model.add_row(
                    f"norev2_t{t}_i{sub.index}_v{v}", "norev2",
                    [(model.var("x", t, graph.south_of(v), v), 1), (w_up, -1)], EQ, 0))
    return rows


def build_artificial_vertex_reversal(model: LinearModel, instance: Instance,
                                     graph: PickingGraph) -> list:
    """Forbid touching an artificial vertex only to turn around there.

    At the tail of each subaisle (and at interior-cross-aisle heads) the
    walk may use both vertical arcs of the last chain edge only if it also
    uses some other arc at that vertex.
    """
    rows = []

    def corner_row(t, sub_index, corner, chain_nbr, tag):
        others = [u for u, _ in graph.adjacency[corner] if u != chain_nbr]
        coeffs = [(model.var("x", t, chain_nbr, corner), 1),
                  (model.var("x", t, corner, chain_nbr), 1)]
        for u in others:
            coeffs.append((model.var("x", t, u, corner), -1))
            coeffs.append((model.var("x", t, corner, u), -1))
        return model.add_row(f"avr_{tag}_t{t}_i{sub_index}", "avr", coeffs, LE, 1)

    for t in range(instance.pickers):
        for sub in graph.subaisles:
            rows.append(corner_row(t, sub.index, sub.tail, graph.north_of(sub.tail), "l"))
            if sub.block >= 1:  # head sits on an interior cross aisle
                rows.append(corner_row(t, sub.index, sub.head, graph.south_of(sub.head), "f"))
    return rows


def build_symmetry_breaking(model: LinearModel, instance: Instance) -> list:
    """Column inequalities over the order-to-picker assignment matrix.

    With orders ranked by id and pickers ordered, order of rank r may only
    go to pickers 1..r, and picker t can be used by rank r only if some
    earlier rank uses picker t-1.  Batches sorted by smallest order id
    always satisfy these rows, so at least one optimal batching survives.
    """
    T = instance.pickers
    ranked = sorted(instance.orders, key=lambda o: o.id)
    rows = []
    for r, o in enumerate(ranked, start=1):
        for t in range(T):
            if t + 1 > r:
                rows.append(model.add_row(
                    f"col_fix_o{o.id}_t{t}", "col_fix",
                    [(model.var("z", o.id, t), 1)], EQ, 0))
        for t in range(1, min(r, T)):
            coeffs = [(model.var("z", o.id, t), 1)]
            for o2 in ranked[:r - 1]:
                coeffs.append((model.var("z", o2.id, t - 1), -1))
            rows.append(model.add_row(
                f"col_link_o{o.id}_t{t}", "col_link", coeffs, LE, 0))
    return rows


# -- TSP-style no-reversal models -------------------------------------------


def _tour_edge_var(model: LinearModel, edge, t: int):
    family = "xt" if (edge.in_e3 and not (edge.in_e1 or edge.in_e2)) else "x"
    return model.var(family, t, edge.u, edge.v)


def build_PU1(instance: Instance, aux: AuxiliaryGraph) -> LinearModel:
    """Undirected TSP model for single-block no-reversal routing."""
    if aux.variant != SINGLE_BLOCK:
        raise VariantMismatchError("build_PU1 needs a single_block auxiliary graph")
    graph = aux.graph
    model = LinearModel("pickopt_P_U1", kind=P_U1)
    T = instance.pickers
    s = graph.origin

    for t in range(T):
        for e in aux.edges:
            pos = model.add_variable(f"x_{t}_{e.u}_{e.v}", BINARY, ("x", t, e.u, e.v))
            model.set_objective_coeff(pos, e.length)
        pos = model.add_variable(f"xt_{t}", BINARY, ("xt", t))
        model.set_objective_coeff(pos, aux.parallel_edge_length)
    for t in range(T):
        for v in aux.vertices:
            model.add_variable(f"y_{t}_{v}", BINARY, ("y", t, v))
    for o in instance.orders:
        for t in range(T):
            model.add_variable(f"z_{o.id}_{t}", BINARY, ("z", o.id, t))

    tail1 = graph.subaisles[0].tail
    f2 = graph.q_east(s)

    def edge_var(t, u, v):
        for e in aux.edges:
            if {e.u, e.v} == {u, v}:
                return model.var("x", t, e.u, e.v)
        raise ValidationError(f"auxiliary edge [{u},{v}] not found")

    for t in range(T):
        coeffs = [(edge_var(t, s, tail1), 1)]
        if f2 is not None:
            coeffs.append((edge_var(t, s, f2), 1))
        model.add_row(f"tspo0_t{t}", "tspo0", coeffs, GE, 1)

        at_s = [( _tour_edge_var(model, e, t), 1) for e in aux.incident(s)]
        model.add_row(f"tspo1_t{t}", "tspo1", at_s + [(model.var("xt", t), 1)], EQ, 2)

        for sub in graph.subaisles:
            order_ids = sorted(_has_picks(instance, graph, sub.index))
            for o in order_ids:
                edge = aux.edges[aux.e_of_subaisle[sub.index]]
                model.add_row(
                    f"tspo2_t{t}_i{sub.index}_o{o}", "tspo2",
                    [(model.var("x", t, edge.u, edge.v), 1), (model.var("z", o, t), -1)],
                    GE, 0)

        at_tail = [(_tour_edge_var(model, e, t), 1) for e in aux.incident(tail1)]
        model.add_row(f"tspo3_t{t}", "tspo3",
                      at_tail + [(model.var("xt", t), 1), (model.var("y", t, tail1), -2)],
                      EQ, 0)
        for u in aux.vertices:
            if u in (s, tail1):
                continue
            at_u = [(_tour_edge_var(model, e, t), 1) for e in aux.incident(u)]
            model.add_row(f"tspo4_t{t}_u{u}", "tspo4",
                          at_u + [(model.var("y", t, u), -2)], EQ, 0)

    for o in instance.orders:
        model.add_row(f"tspo6_o{o.id}", "tspo6",
                      [(model.var("z", o.id, t), 1) for t in range(T)], EQ, 1)
    for t in range(T):
        model.add_row(f"tspo7_t{t}", "tspo7",
                      [(model.var("z", o.id, t), o.size) for o in instance.orders],
                      LE, instance.capacity)
    model.declare_lazy_group("tspo5", GROUP_DESCRIPTIONS["tspo5"])
    return model


def build_PU2(instance: Instance, aux: AuxiliaryGraph,
              with_cross_aisle_bound: bool = False) -> LinearModel:
    """Undirected TSP model for two-block no-reversal routing."""
    if aux.variant != TWO_BLOCK:
        raise VariantMismatchError("build_PU2 needs a two_block auxiliary graph")
    graph = aux.graph
    model = LinearModel("pickopt_P_U2", kind=P_U2)
    T = instance.pickers
    s = graph.origin
    movement = [e for e in aux.edges if e.in_e1 or e.in_e2]
    returns = [e for e in aux.edges if e.in_e3]

    for t in range(T):
        for e in movement:
            pos = model.add_variable(f"x_{t}_{e.u}_{e.v}", BINARY, ("x", t, e.u, e.v))
            model.set_objective_coeff(pos, e.length)
        for e in returns:
            pos = model.add_variable(f"xt_{t}_{e.u}_{e.v}", BINARY, ("xt", t, e.u, e.v))
            model.set_objective_coeff(pos, e.length)
    for t in range(T):
        for v in graph.artificial_vertices:
            model.add_variable(f"y_{t}_{v}", BINARY, ("y", t, v))
    for o in instance.orders:
        for t in range(T):
            model.add_variable(f"z_{o.id}_{t}", BINARY, ("z", o.id, t))

    for t in range(T):
        at_s_move = [(model.var("x", t, e.u, e.v), 1) for e in movement if e.touches(s)]
        model.add_row(f"tspt0_t{t}", "tspt0", at_s_move, GE, 1)
        at_s = [(_tour_edge_var(model, e, t), 1) for e in aux.incident(s)]
        model.add_row(f"tspt1_t{t}", "tspt1", at_s, EQ, 2)

        for sub in graph.subaisles:
            order_ids = sorted(_has_picks(instance, graph, sub.index))
            for o in order_ids:
                edge = aux.edges[aux.e_of_subaisle[sub.index]]
                model.add_row(
                    f"tspt2_t{t}_i{sub.index}_o{o}", "tspt2",
                    [(model.var("x", t, edge.u, edge.v), 1), (model.var("z", o, t), -1)],
                    GE, 0)

        for u in graph.artificial_vertices:
            if u == s:
                continue
            at_u = [(_tour_edge_var(model, e, t), 1) for e in aux.incident(u)]
            model.add_row(f"tspt3_t{t}_u{u}", "tspt3",
                          at_u + [(model.var("y", t, u), -2)], EQ, 0)

        if with_cross_aisle_bound:
            crossing = [(_tour_edge_var(model, e, t), 1) for e in aux.delta(aux.south_set)]
            model.add_row(f"less2con_t{t}", "less2con", crossing, LE, 2)

    for o in instance.orders:
        model.add_row(f"tspt5_o{o.id}", "tspt5",
                      [(model.var("z", o.id, t), 1) for t in range(T)], EQ, 1)
    for t in range(T):
        model.add_row(f"tspt6_t{t}", "tspt6",
                      [(model.var("z", o.id, t), o.size) for o in instance.orders],
                      LE, instance.capacity)
    model.declare_lazy_group("tspt4", GROUP_DESCRIPTIONS["tspt4"])
    return model


# -- top-level dispatcher ----------------------------------------------------


def build_model(instance: Instance, graph: PickingGraph, kind: str,
                options: Optional[ModelOptions] = None) -> LinearModel:
    """Build a formulation with optional row families, validating flags."""
    options = options or ModelOptions()
    validate_options(kind, options, instance)

    if kind == P_U1:
        aux = build_auxiliary_graph(graph, SINGLE_BLOCK)
        model = build_PU1(instance, aux)
    elif kind == P_U2:
        aux = build_auxiliary_graph(graph, TWO_BLOCK)
        model = build_PU2(instance, aux, with_cross_aisle_bound=options.cross_aisle_bound)
    elif kind == P_BASIC:
        model = build_basic(instance, graph)
        if options.subaisle_cuts:
            build_subaisle_cuts(model, instance, graph)
    elif kind == P_A:
        model = build_PA(instance, graph)
    elif kind == P_G:
        model = build_PG(instance, graph)
    elif kind == P_F:
        model = build_PF(instance, graph)
    elif kind == P_U:
        model = build_PG(instance, graph)
        model.name = "pickopt_P_U"
        model.kind = P_U
        build_no_reversal(model, instance, graph)
    else:  # pragma: no cover - validate_options already rejected it
        raise ValidationError(f"unknown formulation kind {kind!r}")

    if kind in ARC_KINDS:
        if options.aisle_cuts:
            build_strengthened_cuts(model, instance, graph, "aisle")
        if options.basic_cuts:
            build_strengthened_cuts(model, instance, graph, "basic")
        if options.single_traversing:
            build_single_traversing(model, instance, graph)
        if options.artificial_vertex_reversal:
            build_artificial_vertex_reversal(model, instance, graph)
    if options.column_inequalities:
        build_symmetry_breaking(model, instance)
    model.meta["kind"] = kind
    model.meta["options"] = sorted(options.enabled())
    return model
