"""Execution-layer splitting and virtual zone layout planning."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import LayoutError
from .frontend import Circuit, GateDag, build_dag, front_layers

SINGLE, MULTI = "Single", "Multi"
EPS = 1e-9


@dataclass(frozen=True)
class ExecLayer:
    kind: str
    gates: tuple  # DAG node indices, ascending

    @property
    def n_pairs(self):
        return len(self.gates) if self.kind == MULTI else 0


def split_layers(dag: GateDag, window_size: int = 4) -> list:
    """Greedy layer splitting over a sliding window of DAG fronts.

    Each round looks at the first ``window_size`` fronts of the not yet
    scheduled sub-DAG, visits candidates by gate size (largest first, then
    index) and admits every gate whose predecessors all sit in earlier layers
    and whose kind matches the first admitted gate.
    """
    if window_size < 1:
        raise ValueError("window_size must be >= 1")
    done = set()
    remaining = set(range(len(dag.gates)))
    layers = []
    while remaining:
        fronts = front_layers(dag.preds, remaining)[:window_size]
        cands = sorted(
            (n for f in fronts for n in f), key=lambda n: (-dag.gates[n].size, n)
        )
        picked, flag = [], None
        for n in cands:
            if not all(p in done for p in dag.preds[n]):
                continue
            kind = MULTI if dag.gates[n].size > 1 else SINGLE
            if flag is None:
                flag = kind
            if kind == flag:
                picked.append(n)
        layers.append(ExecLayer(flag, tuple(sorted(picked))))
        done.update(picked)
        remaining.difference_update(picked)
    return layers


def max_concurrent_entanglement(layers) -> int:
    return max((l.n_pairs for l in layers), default=0)


@dataclass(frozen=True)
class Zone:
    width: float
    height: float
    x: float
    y: float


@dataclass
class VirtualZoneLayout:
    n_qubits: int
    storage_rows: int
    storage_spacing: float
    site_spacing: float
    pair_gap: float
    zone_separation: float
    p_w: float
    w_min: float
    w_s: float
    w_e: float
    w_best: float
    w_selected: float
    max_cz: int
    w_best_formula: float = 0.0
    storage: list = field(default_factory=list)
    entanglement: Zone = None

    @property
    def width(self):
        return self.w_selected

    @property
    def height(self):
        return self.entanglement.y + self.entanglement.height

    @property
    def n_sites(self):
        return entanglement_site_count(self.w_selected, self.site_spacing)

    def storage_row_y(self, r):
        return self.storage[0].y + 1.0 + r * self.storage_spacing

    @property
    def entanglement_row_y(self):
        return self.entanglement.y + self.entanglement.height / 2

    def seat(self, qubit):
        """Home storage position of a logical qubit (tile-local)."""
        R = self.storage_rows
        return ((qubit // R) * self.storage_spacing, self.storage_row_y(qubit % R))

    def site_center(self, k):
        n = self.n_sites
        if not 0 <= k < n:
            raise IndexError(k)
        if self.w_selected < self.site_spacing:
            return self.w_selected / 2
        return self.site_spacing / 2 + k * self.site_spacing

    def to_dict(self):
        return {
            "n_qubits": self.n_qubits,
            "storage_rows": self.storage_rows,
            "p_w": self.p_w,
            "w_min": self.w_min,
            "w_s": self.w_s,
            "w_e": self.w_e,
            "w_best": self.w_best,
            "w_best_formula": self.w_best_formula,
            "w_selected": self.w_selected,
            "max_cz": self.max_cz,
            "storage_zones": [z.__dict__ for z in self.storage],
            "entanglement_zone": self.entanglement.__dict__,
        }


def entanglement_site_count(width, spacing):
    return max(1, int(math.floor(width / spacing + EPS)))


def capacity(width, rows, pitch):
    return rows * (int(math.floor(width / pitch + EPS)) + 1)


def plan_layout(circuit: Circuit, p_w: float, hw, window_size: int = 4, layers=None):
    if not 0.0 <= p_w <= 1.0:
        raise ValueError("p_w must lie in [0, 1]")
    nq = circuit.n_qubits
    if nq < 1:
        raise LayoutError("circuit has no qubits")
    if layers is None:
        layers = split_layers(build_dag(circuit), window_size)
    R, S = hw.storage_rows, hw.storage_spacing_um
    max_cz = max_concurrent_entanglement(layers)

    w_min = (nq // R) * S
    w_s = (nq - 1) * S
    w_e = max_cz * hw.entanglement_site_spacing_um
    w_best_formula = max(w_s, w_e)
    # with one storage row the printed minimum exceeds (nq - 1) * S, so the
    # best width is floored at it to keep the selection monotone in p_w
    w_best = max(w_best_formula, w_min)
    w_sel = p_w * w_best + (1.0 - p_w) * w_min

    w_cap = (math.ceil(nq / R) - 1) * S
    if w_cap > hw.width_um + EPS:
        raise LayoutError(
            f"'{circuit.name}' needs {w_cap} um of storage, device is {hw.width_um} um"
        )
    if capacity(w_sel, R, S) < nq:
        w_sel = w_cap
    w_sel = min(w_sel, hw.width_um)
    w_sel = round(w_sel, 9)

    storage_h = (R - 1) * S + 2.0
    ent_h = hw.pair_gap_um + 2.0
    storage = [Zone(w_sel, storage_h, 0.0, 0.0)]
    ent = Zone(w_sel, ent_h, 0.0, storage_h + hw.zone_separation_um)
    if ent.y + ent.height > hw.height_um + EPS:
        raise LayoutError("zone stack taller than the device")
    return VirtualZoneLayout(
        n_qubits=nq,
        storage_rows=R,
        storage_spacing=S,
        site_spacing=hw.entanglement_site_spacing_um,
        pair_gap=hw.pair_gap_um,
        zone_separation=hw.zone_separation_um,
        p_w=p_w,
        w_min=w_min,
        w_s=w_s,
        w_e=w_e,
        w_best=w_best,
        w_selected=w_sel,
        max_cz=max_cz,
        w_best_formula=w_best_formula,
        storage=storage,
        entanglement=ent,
    )


def zone_geometry(hw):
    """Tile-local zone stack shared by every tile on a device.

    Every layout uses the same vertical stack, so storage row heights and the
    entanglement band are properties of the hardware alone.
    """
    R, S = hw.storage_rows, hw.storage_spacing_um
    storage_h = (R - 1) * S + 2.0
    ent_y = storage_h + hw.zone_separation_um
    ent_h = hw.pair_gap_um + 2.0
    return {
        "storage_rows_y": [1.0 + r * S for r in range(R)],
        "storage_band": (0.0, storage_h),
        "entanglement_band": (ent_y, ent_y + ent_h),
        "entanglement_row_y": ent_y + ent_h / 2,
        "height": ent_y + ent_h,
    }
