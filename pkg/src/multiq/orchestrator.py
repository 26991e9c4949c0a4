"""Merge placed tiles into one multi-programmed NA program.

Per global stage index the movement phases of all tiles are pooled and cut
into AOD-compatible sub-rounds by repeated greedy maximum-independent-set
extraction on the conflict graph; Rydberg pulses are shared; single-qubit
layers become the row-Z / global-Y pulse sequence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import networkx as nx

from .errors import ScheduleError, UnknownQubit
from .estimator import _rydberg_pairs
from .ir import Init, Move, NAProgram, Rydberg, U3Batch, replay
from .placer import MoveOp, batch_compatible
from .planner import zone_geometry  # noqa: F401  (re-exported)

HALF_PI = math.pi / 2
ANGLE_TOL = 1e-12


def build_conflict_graph(moves, hw, occupied=None) -> nx.Graph:
    g = nx.Graph()
    for i, m in enumerate(moves):
        g.add_node(i, move=m)
    for i in range(len(moves)):
        for j in range(i + 1, len(moves)):
            if not batch_compatible([moves[i], moves[j]], hw, occupied)[0]:
                g.add_edge(i, j)
    return g


def greedy_mis_rounds(graph: nx.Graph) -> list:
    """Partition nodes into independent sets, peeling one greedy MIS per round.

    Each MIS picks the node of minimum residual degree (ties by node id),
    deletes its neighbours, and repeats until the residual graph is empty.
    """
    rest = graph.copy()
    rounds = []
    while rest.number_of_nodes():
        cand = rest.copy()
        chosen = []
        while cand.number_of_nodes():
            v = min(cand.nodes, key=lambda n: (cand.degree(n), n))
            chosen.append(v)
            cand.remove_nodes_from([v, *cand.neighbors(v)])
        rounds.append(sorted(chosen))
        rest.remove_nodes_from(chosen)
    return rounds


# --------------------------------------------------------------------------
# row-optimized single-qubit lowering

def _wrap(a):
    a = math.remainder(float(a), 2 * math.pi)
    return math.pi if a <= -math.pi else a


def row_angles(theta, phi, lam):
    """Z angles (first, middle, last) so that RZ(a3) RX(a2) RZ(a1) matches U3.

    The middle step is a Z pulse conjugated by the global Y(-pi/2), Y(pi/2)
    pair, which is an X rotation; U3 is rewritten in Z-X-Z form to match.
    """
    return _wrap(lam - HALF_PI), _wrap(theta), _wrap(phi + HALF_PI)


def lower_u3_rows(targets, positions, hw=None):
    """Row-Z / global-Y sequence realizing ``targets`` (atom -> (theta, phi, lam)).

    ``positions`` maps every atom on the device to its site; all of them see
    the global pulses. Returns a list of (U3Batch, tag) pairs.
    """
    if not targets:
        return []
    angles = {a: row_angles(*targets[a]) for a in targets}
    rows = sorted({positions[a][1] for a in targets})
    everyone = sorted(positions)
    tgt = sorted(targets)
    out = []

    def z_step(k):
        for y in rows:
            atoms = [a for a in tgt if positions[a][1] == y and abs(angles[a][k]) > ANGLE_TOL]
            atoms.sort(key=lambda a: positions[a])
            if atoms:
                batch = U3Batch(
                    [positions[a] for a in atoms], [(0.0, 0.0, angles[a][k]) for a in atoms]
                )
                out.append((batch, {"kind": "rz_row", "row_y": y, "step": k}))

    def y_step(beta):
        batch = U3Batch([positions[a] for a in everyone], [(beta, 0.0, 0.0)] * len(everyone))
        out.append((batch, {"kind": "ry_global", "targets": tgt}))

    z_step(0)
    y_step(-HALF_PI)
    z_step(1)
    y_step(HALF_PI)
    z_step(2)
    return out


# --------------------------------------------------------------------------
# merge

@dataclass
class MergedSchedule:
    program: NAProgram
    tags: list
    labels: list
    offsets: dict  # label -> (first global id, n_qubits)
    anchors: dict  # label -> (x, y)
    tiles: list = field(default_factory=list)

    @property
    def qubit_map(self):
        return self.program.qubit_map

    def tile_qubits(self, label):
        off, n = self.offsets[label]
        return list(range(off, off + n))

    def local_index(self, gid):
        label = self.program.qubit_map[gid]
        return gid - self.offsets[label][0]


def _emit_moves(moves, positions, hw, n_aods, stage, phase, instrs, tags):
    if not moves:
        return
    occupied = list(positions.values())
    graph = build_conflict_graph(moves, hw, occupied)
    for r, rnd in enumerate(greedy_mis_rounds(graph)):
        batch = sorted((moves[i] for i in rnd), key=lambda m: m.qubit)
        ok, why = batch_compatible(batch, hw, list(positions.values()))
        if not ok:
            raise ScheduleError(f"stage {stage} {phase} round {r}: {why}")
        instrs.append(Move([m.src for m in batch], [m.dst for m in batch]))
        group = (stage, phase, r // n_aods) if n_aods > 1 else None
        tags.append({"kind": "move", "stage": stage, "phase": phase, "round": r, "group": group})
        for m in batch:
            positions[m.qubit] = m.dst


def merge(tiles, placement, hw) -> MergedSchedule:
    tiles = list(tiles)
    labels = [t.label for t in tiles]
    if len(set(labels)) != len(labels):
        raise ScheduleError("tile labels in one bin must be unique")
    anchors = placement.anchors if hasattr(placement, "anchors") else list(placement)
    if any(a is None for a in anchors):
        raise ScheduleError("every tile must be placed before merging")
    spans = sorted((a[0], a[0] + t.width_um, t.label) for t, a in zip(tiles, anchors))
    for (_, end, la), (x, _, lb) in zip(spans, spans[1:]):
        if x < end + hw.pair_gap_um - 1e-6:
            raise ScheduleError(f"tiles '{la}' and '{lb}' are closer than {hw.pair_gap_um} um")

    offsets, sites, ids, qmap = {}, [], [], {}
    gid = 0
    for t, (ax, ay) in zip(tiles, anchors):
        offsets[t.label] = (gid, t.n_qubits)
        for q, (x, y) in enumerate(t.seats()):
            sites.append((x + ax, y + ay))
            ids.append(gid + q)
            qmap[gid + q] = t.label
        gid += t.n_qubits
    instrs = [Init(sites, ids)]
    tags = [{"kind": "init"}]
    positions = dict(zip(ids, instrs[0].sites))

    n_stages = max((t.n_stages for t in tiles), default=0)
    for k in range(n_stages):
        active = [(t, a) for t, a in zip(tiles, anchors) if k < t.n_stages]
        for phase in ("in", "out"):
            if phase == "out" and any(t.stages[k].pairs for t, _ in active):
                instrs.append(Rydberg())
                tags.append({"kind": "rydberg", "stage": k})
            pooled = []
            for t, (ax, ay) in active:
                off = offsets[t.label][0]
                for m in t.stage_moves(k, phase):
                    s, d = m.src, m.dst
                    pooled.append(
                        MoveOp(t.label, (s[0] + ax, s[1] + ay), (d[0] + ax, d[1] + ay), off + m.qubit)
                    )
            _emit_moves(pooled, positions, hw, hw.n_aods, k, phase, instrs, tags)
        targets = {}
        for t, _ in active:
            off = offsets[t.label][0]
            for q, ang in t.stages[k].targets.items():
                targets[off + q] = ang
        for batch, tag in lower_u3_rows(targets, positions, hw):
            tag["stage"] = k
            instrs.append(batch)
            tags.append(tag)

    program = NAProgram(instrs, qmap)
    anchor_map = {t.label: tuple(a) for t, a in zip(tiles, anchors)}
    return MergedSchedule(program, tags, labels, offsets, anchor_map, tiles)


def merge_solo(tile, hw) -> MergedSchedule:
    """Single-tenant merge at the origin; the solo reference schedule."""
    return merge([tile], [(0.0, 0.0)], hw)


def route_results(schedule, outcomes) -> dict:
    """Split a global qubit -> outcome map into per-tile local maps."""
    qmap = schedule.qubit_map if hasattr(schedule, "qubit_map") else schedule
    offsets = getattr(schedule, "offsets", None)
    for q in outcomes:
        if q not in qmap:
            raise UnknownQubit(q)
    out = {}
    for q in sorted(qmap):
        if q not in outcomes:
            raise UnknownQubit(q)
        label = qmap[q]
        base = offsets[label][0] if offsets else min(k for k, v in qmap.items() if v == label)
        out.setdefault(label, {})[q - base] = outcomes[q]
    return out


# --------------------------------------------------------------------------
# physical audit

@dataclass
class AuditResult:
    rydberg_violations: list  # (instruction index, (a, b)) cross-tile pairs
    move_violations: list  # (instruction index, reason)

    @property
    def ok(self):
        return not self.rydberg_violations and not self.move_violations


def audit(program: NAProgram, hw) -> AuditResult:
    """Cross-tile blockade pairs at every Rydberg and every illegal move batch."""
    band = zone_geometry(hw)["entanglement_band"]
    qmap = program.qubit_map
    ryd, mov = [], []
    positions = dict(zip(program.init.qubit_ids, program.init.sites))
    for step in replay(program):
        instr = step.instr
        if isinstance(instr, Rydberg):
            for a, b in _rydberg_pairs(positions, hw, band):
                if qmap.get(a) != qmap.get(b):
                    ryd.append((step.index, (a, b)))
        elif isinstance(instr, Move):
            moves = [MoveOp("", s, d, q) for q, s, d in zip(step.atoms, instr.src, instr.dst)]
            ok, why = batch_compatible(moves, hw, list(positions.values()))
            if not ok:
                mov.append((step.index, why))
        positions = step.positions
    return AuditResult(ryd, mov)
