"""Reference per-tile lowering from a layered {U3, CZ} circuit to an NA program.

Each stage runs the fixed phase order: shuttle pairs into the entanglement
zone, fire the Rydberg pulse, shuttle them home, then apply one U3 batch.
Atoms always return to their home seats.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import CapacityError
from .estimator import program_time
from .frontend import Circuit, Gate, build_dag
from .ir import Init, Move, NAProgram, Rydberg, U3Batch, emit_na
from .placer import MoveOp, batch_compatible
from .planner import MULTI, plan_layout, split_layers


@dataclass
class Stage:
    pairs: tuple = ()  # CZ pairs (a, b), a < b, in site order
    targets: dict = field(default_factory=dict)  # qubit -> (theta, phi, lam)
    moves_in: list = field(default_factory=list)  # batches of MoveOp
    moves_out: list = field(default_factory=list)
    parked: dict = field(default_factory=dict)  # qubit -> entanglement position


@dataclass
class Tile:
    label: str
    circuit: Circuit
    layout: object
    program: NAProgram
    stages: list
    est_time_us: float = 0.0
    window_size: int = 4

    @property
    def width_um(self):
        return self.layout.w_selected

    @property
    def n_qubits(self):
        return self.circuit.n_qubits

    @property
    def depth(self):
        return sum(1 for s in self.stages if s.pairs)

    @property
    def n_stages(self):
        return len(self.stages)

    def seats(self):
        return [self.layout.seat(q) for q in range(self.n_qubits)]

    def stage_moves(self, k, phase):
        s = self.stages[k]
        batches = s.moves_in if phase == "in" else s.moves_out
        return [m for b in batches for m in b]

    def phase_positions(self, k, phase):
        """Atom sites (tile-local) at the start of a movement phase."""
        seats = self.seats()
        if phase == "in":
            return seats
        parked = self.stages[k].parked
        return [parked.get(q, seats[q]) for q in range(self.n_qubits)]

    def to_dict(self):
        return {
            "label": self.label,
            "n_qubits": self.n_qubits,
            "layout": self.layout.to_dict(),
            "metrics": {
                "width_um": self.width_um,
                "depth": self.depth,
                "n_stages": self.n_stages,
                "est_time_us": self.est_time_us,
            },
            "gates": [[g.name, list(g.qubits), list(g.params)] for g in self.circuit.gates],
            "window_size": self.window_size,
            "na": emit_na(self.program),
        }


def _batch_greedy(moves, hw, occupied):
    """First-fit split of one phase's moves into AOD-compatible batches."""
    batches = []
    for m in moves:
        for b in batches:
            if batch_compatible(b + [m], hw, occupied)[0]:
                b.append(m)
                break
        else:
            batches.append([m])
    return batches


def build_stages(circuit, layout, layers, dag):
    stages = []
    n_sites = layout.n_sites
    for layer in layers:
        if layer.kind == MULTI:
            pairs = sorted(tuple(sorted(dag.gates[n].qubits)) for n in layer.gates)
            for k in range(0, len(pairs), n_sites):
                stages.append(Stage(pairs=tuple(pairs[k:k + n_sites])))
        else:
            targets = {dag.gates[n].qubits[0]: dag.gates[n].params for n in layer.gates}
            if stages and stages[-1].pairs and not stages[-1].targets:
                stages[-1].targets = targets
            else:
                stages.append(Stage(targets=targets))
    return stages


def compile_tile(circuit: Circuit, layout, hw, window_size: int = 4, label=None) -> Tile:
    if not circuit.is_native:
        raise ValueError("compile_tile expects a circuit rebased to {U3, CZ}")
    label = label or circuit.name
    dag = build_dag(circuit)
    layers = split_layers(dag, window_size)
    stages = build_stages(circuit, layout, layers, dag)
    n = circuit.n_qubits
    seats = [layout.seat(q) for q in range(n)]
    y_ent = layout.entanglement_row_y
    half = layout.pair_gap / 2

    instrs = [Init(seats, range(n))]
    for st in stages:
        if len(st.pairs) > layout.n_sites:
            raise CapacityError(f"{len(st.pairs)} pairs for {layout.n_sites} sites")
        if st.pairs:
            ins, outs = [], []
            for k, (a, b) in enumerate(st.pairs):
                cx = layout.site_center(k)
                left, right = sorted((a, b), key=lambda q: (seats[q][0], seats[q][1], q))
                st.parked[left] = (cx - half, y_ent)
                st.parked[right] = (cx + half, y_ent)
                for qb in (left, right):
                    ins.append(MoveOp(label, seats[qb], st.parked[qb], qb))
                    outs.append(MoveOp(label, st.parked[qb], seats[qb], qb))
            st.moves_in = _batch_greedy(ins, hw, seats)
            parked_occ = [st.parked.get(q, seats[q]) for q in range(n)]
            st.moves_out = _batch_greedy(outs, hw, parked_occ)
            for batch in st.moves_in:
                instrs.append(Move([m.src for m in batch], [m.dst for m in batch]))
            instrs.append(Rydberg())
            for batch in st.moves_out:
                instrs.append(Move([m.src for m in batch], [m.dst for m in batch]))
        if st.targets:
            qs = sorted(st.targets)
            instrs.append(U3Batch([seats[q] for q in qs], [st.targets[q] for q in qs]))

    program = NAProgram(instrs, {q: label for q in range(n)})
    tile = Tile(label, circuit, layout, program, stages, window_size=window_size)
    tile.est_time_us = estimate_tile_time(tile, hw)
    return tile


def estimate_tile_time(tile, hw) -> float:
    return program_time(tile.program, hw)


def compile_circuit(circuit, p_w, hw, window_size=4, label=None) -> Tile:
    """Plan and lower a rebased circuit in one go."""
    layout = plan_layout(circuit, p_w, hw, window_size)
    return compile_tile(circuit, layout, hw, window_size, label)


def dump_tile(tile) -> str:
    return json.dumps(tile.to_dict(), indent=2, sort_keys=True) + "\n"


def load_tile(text, hw) -> Tile:
    """Rebuild a tile from its JSON form by recompiling the stored gates."""
    data = json.loads(text)
    gates = [Gate(name, qs, ps) for name, qs, ps in data["gates"]]
    circuit = Circuit(data["n_qubits"], gates, data["label"])
    tile = compile_circuit(
        circuit, data["layout"]["p_w"], hw, data.get("window_size", 4), data["label"]
    )
    if emit_na(tile.program) != data["na"]:
        raise ValueError(f"tile '{data['label']}' does not match its stored program")
    return tile
