"""Timing, fidelity and throughput model.

Instructions run back to back on one clock. Move sub-rounds that the
orchestrator tagged with the same concurrency group (several AOD grids)
start together and last as long as the slowest of them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import EmptyRun
from .ir import Init, Move, Rydberg, U3Batch, replay


def move_duration(distance_um: float, hw) -> float:
    """Accelerate, cruise, decelerate; triangular when the cruise speed is never reached."""
    if distance_um < 0:
        raise ValueError("distance must be non-negative")
    a, v = hw.move_accel_um_per_us2, hw.move_speed_um_per_us
    transfer = 2.0 * hw.t_transfer_us
    if distance_um < v * v / a:
        return 2.0 * math.sqrt(distance_um / a) + transfer
    return distance_um / v + v / a + transfer


def move_distance(instr: Move) -> float:
    return max(math.dist(s, d) for s, d in zip(instr.src, instr.dst))


def instr_duration(instr, hw) -> float:
    if isinstance(instr, Init):
        return 0.0
    if isinstance(instr, Move):
        return move_duration(move_distance(instr), hw)
    if isinstance(instr, Rydberg):
        return hw.t_2q_us
    if isinstance(instr, U3Batch):
        return hw.t_1q_us
    raise TypeError(f"not an NA instruction: {instr!r}")


def program_time(program, hw) -> float:
    return sum(instr_duration(i, hw) for i in program.instructions)


# --------------------------------------------------------------------------
# timeline

@dataclass
class Timeline:
    starts: list
    ends: list
    n1: dict
    n2: dict
    n_trans: dict
    busy: dict  # qubit -> list of (start, end)
    active_end: dict  # qubit -> end of its last active instruction
    wall_time: float

    def busy_time(self, q, until=math.inf):
        return sum(max(0.0, min(e, until) - s) for s, e in self.busy.get(q, ()) if s < until)


def _rydberg_pairs(positions, hw, band):
    """Atom pairs inside the entanglement band within blockade radius."""
    y0, y1 = band
    inside = sorted(
        (q, p) for q, p in positions.items() if y0 - 1e-6 <= p[1] <= y1 + 1e-6
    )
    pairs = []
    r = hw.blockade_radius_um + 1e-6
    for i in range(len(inside)):
        qa, pa = inside[i]
        for qb, pb in inside[i + 1:]:
            if math.dist(pa, pb) <= r:
                pairs.append((qa, qb))
    return pairs


def timeline(program, hw, tags=None) -> Timeline:
    """Per-qubit busy intervals and gate counters of an NA program.

    ``tags`` (one dict per instruction, as produced by the orchestrator)
    refines single-qubit accounting: a ``"ry_global"`` pulse illuminates
    every atom but only counts as a gate on the atoms in ``tag["targets"]``;
    zero-angle entries of row batches are not counted. Without tags every
    U3Batch site counts as one gate.
    """
    from .planner import zone_geometry

    band = zone_geometry(hw)["entanglement_band"]
    steps = replay(program)
    ids = program.qubit_ids
    n1 = {q: 0 for q in ids}
    n2 = {q: 0 for q in ids}
    nt = {q: 0 for q in ids}
    busy = {q: [] for q in ids}
    active_end = {q: 0.0 for q in ids}
    starts, ends = [], []
    clock = 0.0
    group_start, group_id = 0.0, None
    prev_positions = dict(zip(ids, program.init.sites))
    for step in steps:
        instr = step.instr
        tag = tags[step.index] if tags else {}
        dur = instr_duration(instr, hw)
        gid = tag.get("group")
        if gid is None or gid != group_id:
            group_start = clock
        start = group_start
        group_id = gid
        end = start + dur
        clock = max(clock, end)
        starts.append(start)
        ends.append(end)

        active, lit = set(), set()
        if isinstance(instr, Move):
            active = set(step.atoms)
            for q in step.atoms:
                nt[q] += 2
        elif isinstance(instr, Rydberg):
            for a, b in _rydberg_pairs(prev_positions, hw, band):
                n2[a] += 1
                n2[b] += 1
                active.update((a, b))
        elif isinstance(instr, U3Batch):
            kind = tag.get("kind", "u3")
            if kind == "ry_global":
                active = set(tag.get("targets", step.atoms))
                lit = set(step.atoms)
            else:
                active = {
                    q for q, ang in zip(step.atoms, instr.angles)
                    if kind == "u3" or any(abs(_wrap(a)) > 1e-12 for a in ang)
                }
            for q in active:
                n1[q] += 1
        for q in active | lit:
            if dur > 0:
                busy[q].append((start, end))
        for q in active:
            active_end[q] = max(active_end[q], end)
        prev_positions = step.positions
    wall = max(ends, default=0.0)
    return Timeline(starts, ends, n1, n2, nt, busy, active_end, wall)


def _wrap(a):
    return math.remainder(a, 2 * math.pi)


# --------------------------------------------------------------------------
# fidelity and throughput

def fidelity(n1, n2, n_trans, idle_times, hw) -> float:
    f = (
        hw.fidelity_1q ** n1
        * hw.fidelity_2q ** n2
        * hw.fidelity_transfer ** n_trans
    )
    return f * math.exp(-sum(idle_times) / hw.t2_us)


@dataclass
class TileMetrics:
    label: str
    exec_time_us: float
    n1: int
    n2: int
    n_trans: int
    idle_us: dict
    fidelity: float

    def to_dict(self):
        return {
            "label": self.label,
            "exec_time_us": self.exec_time_us,
            "n1": self.n1,
            "n2": self.n2,
            "n_trans": self.n_trans,
            "idle_us": {str(k): v for k, v in sorted(self.idle_us.items())},
            "fidelity": self.fidelity,
        }


def tile_metrics(tl: Timeline, qubits, label, hw) -> TileMetrics:
    """Counters and fidelity for the atoms ``qubits`` of one tile."""
    qubits = list(qubits)
    t_c = max((tl.active_end[q] for q in qubits), default=0.0)
    idle = {q: max(0.0, t_c - tl.busy_time(q, t_c)) for q in qubits}
    n1 = sum(tl.n1[q] for q in qubits)
    n2 = sum(tl.n2[q] for q in qubits) // 2
    nt = sum(tl.n_trans[q] for q in qubits)
    f = fidelity(n1, n2, nt, idle.values(), hw)
    return TileMetrics(label, t_c, n1, n2, nt, idle, f)


def bin_wall_time_us(exec_times, hw) -> float:
    return hw.t_init_ms * 1e3 + max(exec_times, default=0.0)


@dataclass
class Throughput:
    tau: float  # circuits per ms
    tau_seq: float
    ratio: float
    n_circuits: int
    total_time_ms: float
    sequential_time_ms: float

    def to_dict(self):
        return dict(self.__dict__)


def throughput(bins, hw, solo=None) -> Throughput:
    """``bins`` is a list of lists of per-tile execution times (us).

    ``solo`` optionally gives the same layout of times measured on solo
    schedules; the sequential baseline uses them when present, since a
    circuit run on its own never pays for its neighbours.
    """
    keep = [k for k, b in enumerate(bins) if len(b)]
    bins = [list(bins[k]) for k in keep]
    if not bins:
        raise EmptyRun("no circuits to account")
    base = bins if solo is None else [list(solo[k]) for k in keep]
    if [len(b) for b in base] != [len(b) for b in bins]:
        raise ValueError("solo times must mirror the bin layout")
    n = sum(len(b) for b in bins)
    total = sum(bin_wall_time_us(b, hw) for b in bins) / 1e3
    seq = sum(hw.t_init_ms + t / 1e3 for b in base for t in b)
    tau, tau_seq = n / total, n / seq
    return Throughput(tau, tau_seq, tau / tau_seq, n, total, seq)


@dataclass
class ExecutionReport:
    tiles: list = field(default_factory=list)
    bins: list = field(default_factory=list)
    throughput: Throughput = None

    def to_dict(self):
        return {
            "tiles": self.tiles,
            "bins": self.bins,
            "throughput": self.throughput.to_dict() if self.throughput else None,
        }
