import itertools
import math
import random

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from multiq.backend import compile_circuit
from multiq.checker import check
from multiq.errors import ScheduleError, UnknownQubit
from multiq.estimator import _rydberg_pairs, tile_metrics, timeline
from multiq.frontend import CZ, U3, Circuit, rebase_to_native
from multiq.ir import Move, Rydberg, U3Batch, replay
from multiq.orchestrator import (
    audit,
    build_conflict_graph,
    greedy_mis_rounds,
    lower_u3_rows,
    merge,
    merge_solo,
    route_results,
)
from multiq.placer import MoveOp, batch_compatible
from multiq.planner import zone_geometry

from oracles import equal_up_to_phase, u3


def mv(a, b, q=0):
    return MoveOp("t", a, b, q)


def test_compatible_moves_have_no_edges(hw):
    moves = [mv((0, 0), (0, 5), 0), mv((6, 0), (6, 5), 1), mv((12, 0), (12, 5), 2)]
    g = build_conflict_graph(moves, hw)
    assert g.number_of_edges() == 0


def test_crossing_pair_is_one_edge(hw):
    g = build_conflict_graph([mv((0, 0), (6, 0)), mv((3, 0), (1, 0), 1)], hw)
    assert list(g.edges) == [(0, 1)]


def test_merging_rows_form_a_clique(hw):
    k = 4
    moves = [mv((3 * i, 3 * i), (3 * i, 20), i) for i in range(k)]
    g = build_conflict_graph(moves, hw)
    assert g.number_of_edges() == k * (k - 1) // 2


def test_mis_rounds_examples():
    assert greedy_mis_rounds(nx.empty_graph(5)) == [[0, 1, 2, 3, 4]]
    assert len(greedy_mis_rounds(nx.complete_graph(3))) == 3
    assert len(greedy_mis_rounds(nx.path_graph(5))) == 2


def _chromatic(g):
    nodes = list(g.nodes)
    for k in range(1, len(nodes) + 1):
        for colors in itertools.product(range(k), repeat=len(nodes)):
            c = dict(zip(nodes, colors))
            if all(c[u] != c[v] for u, v in g.edges):
                return k
    return 0


@settings(max_examples=60, deadline=None)
@given(n=st.integers(1, 7), p=st.floats(0, 1), seed=st.integers(0, 1000))
def test_rounds_are_independent_sets_within_bounds(n, p, seed):
    g = nx.gnp_random_graph(n, p, seed=seed)
    rounds = greedy_mis_rounds(g)
    assert sorted(v for r in rounds for v in r) == list(range(n))
    for r in rounds:
        assert not any(g.has_edge(u, v) for u, v in itertools.combinations(r, 2))
    clique = max((len(c) for c in nx.find_cliques(g)), default=0)
    assert max(clique, _chromatic(g)) <= len(rounds) <= n


# --------------------------------------------------------------------------
# row lowering

def _composite(batches, atom_site):
    m = np.eye(2, dtype=complex)
    for b, _ in batches:
        for s, ang in zip(b.sites, b.angles):
            if s == atom_site:
                m = u3(*ang) @ m
    return m


def _lowered(targets, positions):
    return lower_u3_rows(targets, positions)


def test_identity_target():
    pos = {0: (0.0, 1.0), 1: (3.0, 1.0)}
    out = _lowered({0: (0.0, 0.0, 0.0)}, pos)
    assert out
    for a in pos:
        assert equal_up_to_phase(_composite(out, pos[a]), np.eye(2))


def test_pauli_x_target():
    pos = {0: (0.0, 1.0)}
    out = _lowered({0: (math.pi, 0.0, math.pi)}, pos)
    assert equal_up_to_phase(_composite(out, pos[0]), np.array([[0, 1], [1, 0]]))


def test_spectator_sees_identity():
    pos = {0: (0.0, 1.0), 1: (3.0, 4.0)}
    out = _lowered({0: (0.7, 1.1, -0.4)}, pos)
    assert np.allclose(_composite(out, pos[1]), np.eye(2), atol=1e-12)
    assert equal_up_to_phase(_composite(out, pos[0]), u3(0.7, 1.1, -0.4))


def test_row_batches_address_one_row():
    pos = {0: (0.0, 1.0), 1: (3.0, 4.0), 2: (6.0, 1.0)}
    out = _lowered({a: (0.3, 0.4, 0.5) for a in pos}, pos)
    kinds = [t["kind"] for _, t in out]
    assert kinds.count("ry_global") == 2
    for b, t in out:
        if t["kind"] == "rz_row":
            assert len({s[1] for s in b.sites}) == 1


# --------------------------------------------------------------------------
# merge

def _tile(circ, hw, label, p_w=0.4):
    return compile_circuit(circ, p_w, hw, label=label)


def test_solo_merge_is_translation_of_tile(hw):
    c = rebase_to_native(Circuit(3, [CZ(0, 1), U3(0.2, 0.3, 0.4, 2), CZ(1, 2)]))
    t = _tile(c, hw, "t")
    s = merge([t], [(9.0, 0.0)], hw)
    tile_moves = [i for i in t.program.instructions if isinstance(i, Move)]
    sched_moves = [i for i in s.program.instructions if isinstance(i, Move)]
    assert [[(x + 9.0, y) for x, y in m.src] for m in tile_moves] == [list(m.src) for m in sched_moves]
    assert sum(isinstance(i, Rydberg) for i in s.program.instructions) == sum(
        isinstance(i, Rydberg) for i in t.program.instructions)
    assert check(c, s, [0, 1, 2], hw).equivalent


def test_rydberg_pulses_are_shared(hw):
    a = _tile(Circuit(2, [CZ(0, 1)]), hw, "a")
    b = _tile(Circuit(4, [CZ(0, 1), CZ(1, 2), CZ(2, 3)]), hw, "b")
    s = merge([a, b], [(0.0, 0.0), (12.0, 0.0)], hw)
    n_ryd = sum(isinstance(i, Rydberg) for i in s.program.instructions)
    per_tile = [sum(isinstance(i, Rydberg) for i in t.program.instructions) for t in (a, b)]
    assert n_ryd == max(per_tile)
    assert audit(s.program, hw).ok


def test_conflicting_phase_splits(hw):
    hw2 = hw.replace(storage_rows=2)
    # tile a pairs atoms from row 0, tile b from row 1: both land on the
    # entanglement row, so the pooled batch would merge rows
    a = _tile(Circuit(3, [CZ(0, 2)]), hw2, "a")
    b = _tile(Circuit(4, [CZ(1, 3)]), hw2, "b")
    solo = [sum(isinstance(i, Move) for i in t.program.instructions) for t in (a, b)]
    assert solo == [2, 2]
    s = merge([a, b], [(0.0, 0.0), (12.0, 0.0)], hw2)
    rounds = {}
    for tag in s.tags:
        if tag["kind"] == "move":
            rounds[tag["phase"]] = rounds.get(tag["phase"], 0) + 1
    assert rounds == {"in": 2, "out": 2}
    assert sum(isinstance(i, Rydberg) for i in s.program.instructions) == 1
    assert audit(s.program, hw2).ok
    assert check(a.circuit, s, s.tile_qubits("a"), hw2).equivalent
    assert check(b.circuit, s, s.tile_qubits("b"), hw2).equivalent


def test_overlapping_anchors_rejected(hw):
    a = _tile(Circuit(2, [CZ(0, 1)]), hw, "a")
    b = _tile(Circuit(2, [CZ(0, 1)]), hw, "b")
    with pytest.raises(ScheduleError):
        merge([a, b], [(0.0, 0.0), (3.0, 0.0)], hw)


def test_duplicate_labels_rejected(hw):
    a = _tile(Circuit(1, []), hw, "a")
    with pytest.raises(ScheduleError):
        merge([a, a], [(0.0, 0.0), (9.0, 0.0)], hw)


def test_route_results(hw):
    a = _tile(Circuit(2, [CZ(0, 1)]), hw, "a")
    b = _tile(Circuit(2, [CZ(0, 1)]), hw, "b")
    solo = merge_solo(a, hw)
    assert route_results(solo, {0: 1, 1: 0}) == {"a": {0: 1, 1: 0}}
    s = merge([a, b], [(0.0, 0.0), (12.0, 0.0)], hw)
    assert route_results(s, {0: 0, 1: 1, 2: 1, 3: 0}) == {"a": {0: 0, 1: 1}, "b": {0: 1, 1: 0}}
    with pytest.raises(UnknownQubit):
        route_results(s, {0: 0, 1: 1, 2: 1})
    with pytest.raises(UnknownQubit):
        route_results(s, {0: 0, 1: 1, 2: 1, 3: 0, 9: 1})


def _intended_pairs(schedule):
    """Stage index -> global CZ pairs every tile wants at that stage's pulse."""
    out = {}
    for t in schedule.tiles:
        off = schedule.offsets[t.label][0]
        for k, st_ in enumerate(t.stages):
            for a, b in st_.pairs:
                out.setdefault(k, set()).add((off + a, off + b))
    return out


def test_corpus_bundles_are_safe_and_faithful(corpus, hw):
    from multiq.placer import place
    from multiq.bundler import SAParams

    tiles = [_tile(rebase_to_native(e.circuit), hw, e.name) for e in corpus]
    band = zone_geometry(hw)["entanglement_band"]
    for k in range(0, len(tiles), 4):
        group = tiles[k:k + 4]
        pl = place(group, hw, params=SAParams(iterations=500))
        keep = [t for t, z in zip(group, pl.placed) if z]
        pl = place(keep, hw, params=SAParams(iterations=500))
        s = merge(keep, pl, hw)
        assert audit(s.program, hw).ok
        want = _intended_pairs(s)
        prev = dict(zip(s.program.init.qubit_ids, s.program.init.sites))
        for step, tag in zip(replay(s.program), s.tags):
            if isinstance(step.instr, Rydberg):
                got = {tuple(sorted(p)) for p in _rydberg_pairs(prev, hw, band)}
                assert got == want[tag["stage"]]
            if isinstance(step.instr, Move):
                moves = [MoveOp("", a, b, q) for q, a, b in
                         zip(step.atoms, step.instr.src, step.instr.dst)]
                assert batch_compatible(moves, hw, list(prev.values()))[0]
            prev = step.positions
        tl = timeline(s.program, hw, s.tags)
        for t in keep:
            solo = merge_solo(t, hw)
            ms = tile_metrics(timeline(solo.program, hw, solo.tags), range(t.n_qubits), "", hw)
            mm = tile_metrics(tl, s.tile_qubits(t.label), "", hw)
            assert (mm.n1, mm.n2, mm.n_trans) == (ms.n1, ms.n2, ms.n_trans)
            assert mm.exec_time_us >= ms.exec_time_us - 1e-9
            assert check(t.circuit, s, s.tile_qubits(t.label), hw, oracle_limit=0).equivalent


def test_multiple_aods_group_rounds(hw):
    hw2 = hw.replace(storage_rows=2, n_aods=2)
    a = _tile(Circuit(3, [CZ(0, 2)]), hw2, "a")
    b = _tile(Circuit(4, [CZ(1, 3)]), hw2, "b")
    s = merge([a, b], [(0.0, 0.0), (12.0, 0.0)], hw2)
    groups = [t["group"] for t in s.tags if t["kind"] == "move"]
    assert groups == [(0, "in", 0), (0, "in", 0), (0, "out", 0), (0, "out", 0)]
    one = merge([a, b], [(0.0, 0.0), (12.0, 0.0)], hw2.replace(n_aods=1))
    t1 = timeline(one.program, hw2, one.tags).wall_time
    t2 = timeline(s.program, hw2, s.tags).wall_time
    assert t2 < t1
