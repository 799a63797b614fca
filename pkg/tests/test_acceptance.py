"""Acceptance gate: one test per criterion, zero numeric tolerance.

Every criterion prints its own PASS line so a full run reads as a
checklist.  The shared suite holds 100 seeded random instances over
desk-scale layouts (at most 3 aisles, 2 blocks, 2 locations per subaisle,
5 orders, trolley capacity 8).
"""

import random
import time
from itertools import combinations

import pytest

from conftest import make_suite, shared_graph
from oracles import (blind_solve, disconnected_candidate,
                     support_connected_to_origin)
from pickopt import (Instance, Order, Pick, R_S1, R_S2, VariableAssignment,
                     WarehouseLayout, build_auxiliary_graph, build_basic,
                     build_PF, build_PG, build_PU2, build_single_traversing,
                     build_strengthened_cuts, build_subaisle_cuts,
                     check_feasible, cut_to_row, encode_walk_PF,
                     encode_walk_PG, eq75_value, evaluate_s_shape,
                     s_shape_candidates, separate_connectivity,
                     solve_no_reversal_exact, walk_space)
from pickopt.encoding import encode_best_s_shape
from pickopt.layout import TWO_BLOCK


def _ok(n, text):
    print(f"\nACCEPTANCE {n} {text}: PASS")


def test_acceptance_1_oracle_equivalence(acceptance_suite):
    from pickopt import solve_exact

    start = time.perf_counter()
    for instance, graph in acceptance_suite:
        total = solve_exact(instance, graph).total
        blind = blind_solve(instance, graph)
        assert total == blind, (instance, total, blind)
    elapsed = time.perf_counter() - start
    assert elapsed < 300, f"suite took {elapsed:.0f}s, bound is 5 minutes"
    _ok(1, f"solve_exact equals the symmetry-blind enumerator on "
           f"{len(acceptance_suite)} instances ({elapsed:.1f}s)")


def _every_gamma_cut_holds(graph, instance, assignment):
    s = graph.origin
    others = [v for v in graph.artificial_vertices if v != s]
    for t in range(instance.pickers):
        for r in range(2, len(others) + 1):
            for S in combinations(others, r):
                boundary = graph.eta_plus(set(S))
                lhs = sum(assignment.get(f"g_{t}_{u}_{v}") for u, v in boundary)
                for u0 in S:
                    if assignment.get(f"y_{t}_{u0}") == 1 and lhs < 1:
                        return False
    return True


def test_acceptance_2_feasibility_direction(acceptance_suite, suite_solutions):
    for (instance, graph), solution in zip(acceptance_suite, suite_solutions):
        assert graph.n_artificial <= 8
        pg = build_PG(instance, graph)
        a_pg = encode_walk_PG(pg, instance, graph, solution)
        report = check_feasible(pg, a_pg)
        assert report.satisfied, report.violations[:4]
        assert pg.objective_value(a_pg.values) == solution.total
        assert _every_gamma_cut_holds(graph, instance, a_pg)

        pf = build_PF(instance, graph)
        a_pf = encode_walk_PF(pf, instance, graph, solution)
        report = check_feasible(pf, a_pf)
        assert report.satisfied, report.violations[:4]
        assert pf.objective_value(a_pf.values) == solution.total
    _ok(2, "optimal-walk encodings satisfy all of P_G and P_F, "
           "with every reduced-graph cut enumerated, at the oracle objective")


def test_acceptance_3_cut_validity(acceptance_suite, suite_solutions):
    for (instance, graph), solution in zip(acceptance_suite, suite_solutions):
        # valid families: the optimal encoding satisfies every added row,
        # so layering the family cannot move the optimum
        model = build_basic(instance, graph)
        build_subaisle_cuts(model, instance, graph)
        build_strengthened_cuts(model, instance, graph, "aisle")
        build_strengthened_cuts(model, instance, graph, "basic")
        if instance.layout.n_blocks <= 2:
            build_single_traversing(model, instance, graph)
        assignment = encode_walk_PG(model, instance, graph, solution)
        report = check_feasible(model, assignment, max_report=10_000)
        # the single-traversing family is only optimality-preserving, so an
        # arbitrary optimal walk may violate it; every other family must hold
        for violation in report.violations:
            assert violation.group == "sitr", violation

        space = walk_space(graph)
        # single traversing: restricting the walk space keeps the optimum
        exempt = frozenset([0]) if instance.layout.n_blocks == 2 else frozenset()
        restricted = blind_solve(instance, graph, space.mask_single_traversal(exempt))
        assert restricted == solution.total
        # artificial vertex reversal: same restriction argument
        restricted = blind_solve(instance, graph, space.mask_no_artificial_uturn())
        assert restricted == solution.total
        # column inequalities: the canonical-representative enumeration of
        # solve_exact equals the symmetry-blind optimum
        assert solution.total == blind_solve(instance, graph)
    _ok(3, "subaisle, aisle, basic, single-traversing, reversal and column "
           "families never change the oracle optimum")


def test_acceptance_4_single_traversal_restriction():
    one_block = make_suite(50, shapes=[(1, 1, 1), (1, 1, 2), (2, 1, 1),
                                       (2, 1, 2), (3, 1, 1), (3, 1, 2)],
                           master_seed=41)
    two_block = make_suite(50, shapes=[(1, 2, 1), (1, 2, 2), (2, 2, 1)],
                           master_seed=42)
    for instance, graph in one_block:
        space = walk_space(graph)
        restricted = blind_solve(instance, graph, space.mask_single_traversal())
        assert restricted == blind_solve(instance, graph)
    for instance, graph in two_block:
        space = walk_space(graph)
        restricted = blind_solve(instance, graph,
                                 space.mask_single_traversal(frozenset([0])))
        assert restricted == blind_solve(instance, graph)
    _ok(4, "single-traversal restriction preserves the optimum on 50 "
           "single-block and 50 two-block instances (first subaisle exempt)")


def test_acceptance_5_s_shape_optimality():
    rng = random.Random(5150)
    shapes = [(1, 2, 1), (1, 2, 2), (2, 2, 1)]
    counterexamples = []
    done = 0
    while done < 50:
        na, nb, m = shapes[rng.randrange(len(shapes))]
        layout = WarehouseLayout(na, nb, m, 1, rng.choice((1, 2)))
        graph = shared_graph(layout)
        chosen = [v for sub in graph.subaisles for v in sub.locs
                  if rng.random() < 0.5]
        if not chosen:
            continue
        picks = tuple(
            Pick(graph.subaisles[graph.subaisle_of(v)].aisle,
                 graph.subaisles[graph.subaisle_of(v)].block,
                 graph.subaisles[graph.subaisle_of(v)].locs.index(v), 0)
            for v in sorted(chosen))
        instance = Instance(layout, (Order(0, 1, picks),), 8, 1)
        exact = solve_no_reversal_exact(instance, graph).total
        n = layout.n_aisles
        subs = sorted({graph.subaisle_of(v) for v in chosen})
        K1 = [i for i in subs if i < n]
        K2 = [i for i in subs if i >= n]
        best = min(r.total_length for r in s_shape_candidates(graph, K1, K2))
        if best != exact:
            counterexamples.append((layout, sorted(chosen), best, exact))
        done += 1
    for c in counterexamples:
        print("S-shape counterexample:", c)
    assert not counterexamples, counterexamples
    _ok(5, "serpentine route minimum equals the no-reversal optimum on 50 "
           "two-block single-batch instances")


def test_acceptance_6_separation_soundness_completeness(acceptance_suite,
                                                        suite_solutions):
    for (instance, graph), solution in zip(acceptance_suite, suite_solutions):
        model = build_PG(instance, graph)
        final = encode_walk_PG(model, instance, graph, solution)
        bad = VariableAssignment(disconnected_candidate(instance, graph, solution))
        candidates = [bad, final]
        iterations = 0
        while True:
            iterations += 1
            assert iterations <= 20
            current = candidates[min(iterations, len(candidates)) - 1]
            cuts = separate_connectivity(graph, "P_G", current, instance)
            if not cuts:
                break
            for cut in cuts:
                row = cut_to_row(cut, model, graph)
                lhs = sum(coef * current.get(model.var_name(pos))
                          for pos, coef in row.coeffs)
                assert lhs < row.rhs, "emitted cut must be violated"
        # completeness certificate, checked independently of the separator
        assert support_connected_to_origin(instance, graph, final)
        assert check_feasible(model, final).satisfied
    _ok(6, "every emitted cut is violated by its trigger; the add-cuts loop "
           "terminates within 20 rounds and certifies connectivity")


def test_acceptance_7_parity_and_crossing_bound():
    layout = WarehouseLayout(3, 2, 1, 1, 2)
    graph = shared_graph(layout)
    aux = build_auxiliary_graph(graph, TWO_BLOCK)
    d = layout.subaisle_length
    n = layout.n_aisles
    cases = [
        ([0, 1], [3, 4], 0),
        ([0, 1, 2], [3, 4], d),
        ([0, 1], [3, 4, 5], d),
        ([0, 1, 2], [3, 4, 5], 2 * d),
    ]
    for K1, K2, excess in cases:
        route = evaluate_s_shape(graph, K1, K2, R_S1)
        assert route.vertical_length - (len(K1) + len(K2)) * d == excess

        picks = []
        for i in K1 + K2:
            sub = graph.subaisles[i]
            picks.append(Pick(sub.aisle, sub.block, 0, 0))
        instance = Instance(layout, (Order(0, 1, tuple(picks)),), 8, 1)
        model = build_PU2(instance, aux, with_cross_aisle_bound=True)
        # the cheapest serpentine and the canonical r_S2 both encode
        # feasibly and cross the second cross aisle exactly twice
        for kind in (None, R_S2):
            _, assignment = encode_best_s_shape(model, aux, instance, 0, [0],
                                                kind=kind)
            report = check_feasible(model, assignment)
            assert report.satisfied, report.violations[:4]
            assert eq75_value(model, aux, assignment, 0) == 2
    _ok(7, "all four vertical-excess parity cases reproduced; serpentine "
           "encodings satisfy the crossing bound with value exactly 2")


def test_acceptance_8_benchmark_values():
    pytest.skip(
        "ACCEPTANCE 8 SKIPPED: the public benchmark order data and the "
        "original layout constants are not available in this environment; "
        "the conditional checks (exact 346 and seed 382 at delta=5, O=5) "
        "cannot run without them.")


def test_acceptance_9_determinism(tmp_path):
    from pickopt.cli import main

    def run_twice(args, out_name):
        paths = []
        for k in (0, 1):
            out = tmp_path / f"{out_name}.{k}"
            assert main(args + ["-o", str(out)]) == 0
            paths.append(out.read_bytes())
        return paths

    gen = ["generate", "--aisles", "2", "--blocks", "1", "--locs", "2",
           "--orders", "3", "--delta", "5", "--seed", "9"]
    a, b = run_twice(gen, "inst")
    assert a == b
    inst = tmp_path / "inst.json"
    inst.write_bytes(a)
    for fmt in ("lp", "mps", "json"):
        x, y = run_twice(["build", "-i", str(inst), "-f", "PG", "--format", fmt],
                         f"model_{fmt}")
        assert x == y
    for mode in ("exact", "no-reversal-exact", "seed", "cwii"):
        x, y = run_twice(["solve", "-i", str(inst), "--mode", mode], f"sol_{mode}")
        assert x == y
    _ok(9, "generate, build and solve artifacts are byte-identical across runs")
