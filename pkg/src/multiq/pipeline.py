"""End-to-end driver: compile, bundle, place, merge, estimate, check."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

from .backend import compile_circuit
from .bundler import SAParams, bundle
from .checker import ORACLE_LIMIT, check
from .estimator import throughput, tile_metrics, timeline
from .frontend import rebase_to_native
from .orchestrator import audit, merge, merge_solo
from .placer import place


@dataclass
class RunManifest:
    inputs: list = field(default_factory=list)
    hw_path: str = None
    p_w: float = 0.4
    alpha: float = 0.6
    place_alpha: float = 1.0
    place_beta: float = None
    sa_iters: int = 20000
    sa_seed: int = 42
    window: int = 4
    out: str = "multiq-out"
    oracle_limit: int = ORACLE_LIMIT

    def __post_init__(self):
        for name in ("p_w", "alpha"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.window < 1:
            raise ValueError("window must be >= 1")
        if self.sa_iters < 1:
            raise ValueError("sa-iters must be >= 1")

    def to_dict(self):
        return asdict(self)


@dataclass
class BinResult:
    index: int
    tiles: list
    placement: object
    schedule: object
    metrics: dict  # label -> TileMetrics (multi-programmed)
    audit: object
    rho_s: float
    rho_t: float


@dataclass
class RunResult:
    tiles: list
    solo: dict  # label -> TileMetrics
    bins: list
    verdicts: dict  # label -> Verdict
    throughput: object
    report: dict

    @property
    def ok(self):
        return all(v.equivalent for v in self.verdicts.values()) and all(
            b.audit.ok for b in self.bins
        )


def unique_labels(names):
    seen, out = {}, []
    for n in names:
        k = seen.get(n, 0) + 1
        seen[n] = k
        out.append(n if k == 1 else f"{n}#{k}")
    return out


def compile_all(circuits, manifest, hw):
    """Rebase and compile (label, circuit) pairs into tiles."""
    tiles = []
    for label, circ in circuits:
        native = rebase_to_native(circ)
        tiles.append(compile_circuit(native, manifest.p_w, hw, manifest.window, label))
    return tiles


def bundle_and_place(tiles, manifest, hw):
    """Bins with placements; tiles left unplaced are re-bundled until none remain."""
    params = SAParams(iterations=manifest.sa_iters, seed=manifest.sa_seed, alpha=manifest.alpha)
    gap = grid = hw.storage_spacing_um
    queue = list(tiles)
    out = []
    rounds = 0
    while queue:
        rounds += 1
        if rounds > len(tiles) + 1:
            raise RuntimeError("placement made no progress")
        bins = bundle(queue, params, hw, gap_um=gap, grid_um=grid)
        queue = []
        for b in bins:
            pl = place(
                b.tiles, hw, alpha=manifest.place_alpha, beta=manifest.place_beta,
                params=params, grid_um=grid, gap_um=gap,
            )
            keep = [i for i, z in enumerate(pl.placed) if z]
            queue.extend(b.tiles[i] for i in pl.unplaced)
            if len(keep) != len(b.tiles):
                sub = [b.tiles[i] for i in keep]
                pl = place(sub, hw, alpha=manifest.place_alpha, beta=manifest.place_beta,
                           params=params, grid_um=grid, gap_um=gap)
                b.tiles = sub
            if b.tiles:
                out.append((b, pl))
    return out


def run(circuits, manifest: RunManifest, hw) -> RunResult:
    tiles = compile_all(circuits, manifest, hw)
    solo = {}
    for t in tiles:
        s = merge_solo(t, hw)
        solo[t.label] = tile_metrics(timeline(s.program, hw, s.tags), range(t.n_qubits), t.label, hw)

    placed = bundle_and_place(tiles, manifest, hw)
    bins, verdicts = [], {}
    for k, (b, pl) in enumerate(placed):
        sched = merge(b.tiles, pl, hw)
        tl = timeline(sched.program, hw, sched.tags)
        metrics = {
            t.label: tile_metrics(tl, sched.tile_qubits(t.label), t.label, hw) for t in b.tiles
        }
        for t in b.tiles:
            verdicts[t.label] = check(
                t.circuit, sched, sched.tile_qubits(t.label), hw, manifest.oracle_limit
            )
        bins.append(BinResult(k, b.tiles, pl, sched, metrics, audit(sched.program, hw),
                              b.rho_s, b.rho_t))

    tp = throughput(
        [[b.metrics[t.label].exec_time_us for t in b.tiles] for b in bins],
        hw,
        solo=[[solo[t.label].exec_time_us for t in b.tiles] for b in bins],
    )
    report = build_report(manifest, tiles, solo, bins, tp, hw)
    return RunResult(tiles, solo, bins, verdicts, tp, report)


def build_report(manifest, tiles, solo, bins, tp, hw):
    bin_of = {t.label: b.index for b in bins for t in b.tiles}
    tile_rows = []
    for t in tiles:
        b = bins[bin_of[t.label]]
        multi = b.metrics[t.label]
        tile_rows.append({
            "label": t.label,
            "bin": b.index,
            "n_qubits": t.n_qubits,
            "width_um": t.width_um,
            "depth": t.depth,
            "est_time_us": t.est_time_us,
            "solo": solo[t.label].to_dict(),
            "multi": multi.to_dict(),
            "fidelity_delta": multi.fidelity - solo[t.label].fidelity,
        })
    bin_rows = []
    for b in bins:
        times = [m.exec_time_us for m in b.metrics.values()]
        bin_rows.append({
            "index": b.index,
            "tiles": [t.label for t in b.tiles],
            "anchors": {t.label: list(a) for t, a in zip(b.tiles, b.placement.anchors)},
            "placement_energy": b.placement.energy,
            "rho_s": b.rho_s,
            "rho_t": b.rho_t,
            "exec_time_us": max(times),
            "wall_time_us": hw.t_init_ms * 1e3 + max(times),
            "n_instructions": len(b.schedule.program.instructions),
            "audit_ok": b.audit.ok,
        })
    cfg = manifest.to_dict()
    # output location does not affect results; keep reports relocatable
    cfg.pop("out", None)
    cfg["inputs"] = [str(p).rsplit("/", 1)[-1] for p in cfg["inputs"]]
    if cfg["hw_path"]:
        cfg["hw_path"] = str(cfg["hw_path"]).rsplit("/", 1)[-1]
    return {
        "manifest": cfg,
        "tiles": tile_rows,
        "bins": bin_rows,
        "throughput": tp.to_dict(),
    }


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"
