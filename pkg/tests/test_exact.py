import random

import pytest

from conftest import ORACLE_SHAPES, make_suite, shared_graph
from oracles import blind_solve, brute_force_bin_pack
from pickopt import (Instance, MAX_ORACLE_EDGES, OracleSizeError, Order, Pick,
                     ValidationError, WarehouseLayout, bin_pack_exact,
                     capacity_feasible_partitions, first_fit_decreasing,
                     generate_instance, load_solution, route_oracle,
                     save_solution, solve_exact, solve_no_reversal_exact,
                     validate_solution, walk_space)

LAYOUT = WarehouseLayout(2, 1, 2, 1, 2)


def test_route_oracle_spec_examples():
    g = shared_graph(LAYOUT)
    v11 = g.subaisles[0].locs[0]
    v21 = g.subaisles[1].locs[0]
    assert route_oracle(g, set()).length(g) == 2  # cheapest out-and-back
    assert route_oracle(g, {v11}).length(g) == 2
    assert route_oracle(g, {v11, v21}).length(g) == 8


def test_route_oracle_walks_are_valid():
    g = shared_graph(LAYOUT)
    required = {g.subaisles[0].locs[1], g.subaisles[1].locs[0]}
    walk = route_oracle(g, required)
    walk.validate(g, frozenset(required))
    assert all(m in (1, 2) for _, m in walk.edge_mult)


def test_route_oracle_deterministic_tie_break():
    g = shared_graph(LAYOUT)
    w1 = route_oracle(g, {g.subaisles[0].locs[0]})
    w2 = route_oracle(g, {g.subaisles[0].locs[0]})
    assert w1.edge_mult == w2.edge_mult


def test_oracle_bound_enforced():
    big = WarehouseLayout(3, 2, 2, 1, 2)  # |E| = 24
    g = shared_graph(big)
    assert len(g.edges) > MAX_ORACLE_EDGES
    with pytest.raises(OracleSizeError):
        walk_space(g)


def test_optimal_walks_fit_the_multiplicity_cap():
    # optimal walks never need undirected multiplicity above 2, and the
    # oracle space never stores more
    suite = make_suite(10, master_seed=77)
    for instance, graph in suite:
        sol = solve_exact(instance, graph)
        for walk in sol.walks:
            assert all(m <= 2 for _, m in walk.edge_mult)


def test_solve_exact_one_order():
    inst = generate_instance(LAYOUT, 1, 5, seed=0)
    g = shared_graph(LAYOUT)
    sol = solve_exact(inst, g)
    assert len(sol.batching) == inst.pickers
    assert sol.batching[0] == (0,)
    validate_solution(inst, g, sol)


def test_partitions_respect_capacity():
    sizes = {0: 5, 1: 4, 2: 3}
    parts = list(capacity_feasible_partitions([0, 1, 2], sizes, 8, 3))
    for partition in parts:
        for batch in partition:
            assert sum(sizes[o] for o in batch) <= 8
        # canonical: batches sorted by smallest member
        mins = [min(b) for b in partition]
        assert mins == sorted(mins)
    assert all({0, 1} != set(b) for p in parts for b in p)  # 5+4 > 8


def test_solve_exact_matches_blind_enumeration():
    suite = make_suite(15, master_seed=31)
    for instance, graph in suite:
        sol = solve_exact(instance, graph)
        assert sol.total == blind_solve(instance, graph)


def test_solve_exact_threads_deterministic():
    inst = generate_instance(LAYOUT, 4, 10, seed=6)
    g = shared_graph(LAYOUT)
    a = solve_exact(inst, g, threads=1)
    b = solve_exact(inst, g, threads=4)
    assert a == b


def test_empty_picker_departs():
    inst = generate_instance(LAYOUT, 1, 5, seed=0)
    inst = Instance(inst.layout, inst.orders, inst.capacity, pickers=2)
    g = shared_graph(LAYOUT)
    sol = solve_exact(inst, g)
    assert len(sol.walks) == 2
    assert sol.batching[1] == ()
    assert sol.walks[1].length(g) == 2  # cheapest out-and-back


def test_exact_order_bound():
    inst = generate_instance(LAYOUT, 7, 5, seed=1)
    with pytest.raises(OracleSizeError):
        solve_exact(inst, shared_graph(LAYOUT))


def test_no_reversal_subaisle_one_only():
    layout = WarehouseLayout(2, 1, 1, 1, 5)  # wide aisle spacing
    order = Order(0, 1, (Pick(0, 0, 0, 0),))
    inst = Instance(layout, (order,), 8, 1)
    g = shared_graph(layout)
    sol = solve_no_reversal_exact(inst, g)
    assert sol.total == 2 * layout.subaisle_length  # down and back up


def test_no_reversal_walks_fully_traverse():
    suite = make_suite(10, master_seed=55)
    for instance, graph in suite:
        sol = solve_no_reversal_exact(instance, graph)
        for walk in sol.walks:
            mult = walk.mult
            for sub in graph.subaisles:
                values = {mult.get(e, 0) for e in sub.edge_ids}
                assert len(values) == 1, "subaisle entered but not fully traversed"


def test_no_reversal_at_least_exact():
    suite = make_suite(10, master_seed=56)
    for instance, graph in suite:
        assert solve_no_reversal_exact(instance, graph).total >= solve_exact(instance, graph).total


def test_no_reversal_empty_picker_departure():
    # an idle picker may turn around inside a cross aisle, so the cheapest
    # no-reversal departure is the horizontal out-and-back here
    inst = generate_instance(LAYOUT, 1, 5, seed=0)
    inst = Instance(inst.layout, inst.orders, inst.capacity, pickers=2)
    g = shared_graph(LAYOUT)
    sol = solve_no_reversal_exact(inst, g)
    assert sol.walks[1].length(g) == 2 * LAYOUT.aisle_spacing
    mult = sol.walks[1].mult
    assert all(g.edge_subaisle[e] is None for e in mult)


def test_export_model_writes_files(tmp_path):
    from pickopt import build_basic, export_model

    inst = generate_instance(LAYOUT, 2, 5, seed=1)
    g = shared_graph(LAYOUT)
    model = build_basic(inst, g)
    for fmt in ("lp", "mps", "json"):
        path = tmp_path / f"m.{fmt}"
        export_model(model, fmt, path)
        again = tmp_path / f"m2.{fmt}"
        export_model(model, fmt, again)
        assert path.read_bytes() == again.read_bytes()
    pruned = tmp_path / "pruned.lp"
    export_model(model, "lp", pruned, prune_unused=True)
    assert pruned.stat().st_size <= (tmp_path / "m.lp").stat().st_size


def test_bin_pack_examples():
    assert bin_pack_exact([3, 3, 3], 8) == 2
    assert bin_pack_exact([5, 4, 3], 8) == 2
    assert bin_pack_exact([8, 8, 8], 8) == 3
    with pytest.raises(ValidationError, match="infeasible"):
        bin_pack_exact([9], 8)


def test_bin_pack_matches_brute_force():
    rng = random.Random(17)
    for _ in range(25):
        sizes = [1 + rng.randrange(8) for _ in range(1 + rng.randrange(12))]
        assert bin_pack_exact(sizes, 8) == brute_force_bin_pack(sizes, 8)


def test_bin_pack_ffd_is_upper_bound():
    rng = random.Random(18)
    for _ in range(20):
        sizes = [1 + rng.randrange(8) for _ in range(10)]
        assert bin_pack_exact(sizes, 8) <= first_fit_decreasing(sizes, 8)


def test_solution_round_trip(tmp_path):
    inst = generate_instance(LAYOUT, 3, 10, seed=13)
    g = shared_graph(LAYOUT)
    sol = solve_exact(inst, g)
    path = tmp_path / "sol.json"
    save_solution(sol, g, path)
    again = load_solution(path, g)
    assert again == sol
    save_solution(again, g, tmp_path / "sol2.json")
    assert (tmp_path / "sol2.json").read_bytes() == path.read_bytes()


def test_all_oracle_shapes_within_bound():
    for shape in ORACLE_SHAPES:
        g = shared_graph(WarehouseLayout(*shape, 1, 2))
        assert len(g.edges) <= MAX_ORACLE_EDGES
