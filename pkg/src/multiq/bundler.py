"""Partition a queue of tiles into execution bins by simulated annealing.

The objective averages, over bins, a weighted sum of spatial utilization
(occupied width over device width) and temporal utilization (mean tile time
over the slowest tile's time).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyBin, InfeasibleTile

EPS = 1e-9


FINAL_TEMP_RATIO = 1e-3


@dataclass(frozen=True)
class SAParams:
    t0: float = 1.0
    gamma: float = 0.995
    iterations: int = 20000
    seed: int = 42
    alpha: float = 0.6

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if not 0.0 < self.gamma < 1.0:
            raise ValueError("gamma must lie in (0, 1)")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")
        if self.t0 <= 0:
            raise ValueError("t0 must be positive")

    @property
    def stage_length(self) -> int:
        """Iterations per temperature step, so cooling spans the whole budget.

        T is multiplied by gamma once per stage; with the defaults (20 000
        iterations, gamma 0.995) that is 14 iterations per stage and T ends
        near FINAL_TEMP_RATIO * t0 instead of freezing after ~1 000 steps.
        """
        stages = math.ceil(math.log(FINAL_TEMP_RATIO) / math.log(self.gamma))
        return max(1, self.iterations // stages)


@dataclass(frozen=True)
class TileSpec:
    """Minimal stand-in for a compiled tile: what bundling looks at."""

    label: str
    width_um: float
    est_time_us: float


@dataclass
class Bin:
    tiles: list
    rho_s: float = field(default=None)
    rho_t: float = field(default=None)

    @property
    def labels(self):
        return [t.label for t in self.tiles]

    def __len__(self):
        return len(self.tiles)


def rho_spatial(tiles, hw) -> float:
    tiles = getattr(tiles, "tiles", tiles)
    if not tiles:
        raise EmptyBin("spatial utilization of an empty bin")
    used = sum(t.width_um for t in tiles)
    return min(1.0, max(used / hw.width_um, EPS))


def rho_temporal(tiles) -> float:
    tiles = getattr(tiles, "tiles", tiles)
    if not tiles:
        raise EmptyBin("temporal utilization of an empty bin")
    times = [t.est_time_us for t in tiles]
    top = max(times)
    if top <= 0:
        return 1.0
    return sum(times) / (len(times) * top)


def objective(bins, hw, alpha) -> float:
    """Mean over bins of alpha * rho_S + (1 - alpha) * rho_T."""
    if not bins:
        return 0.0
    total = 0.0
    for b in bins:
        total += alpha * rho_spatial(b, hw) + (1.0 - alpha) * rho_temporal(b)
    return total / len(bins)


def footprint(width, grid_um=None):
    """Width a tile claims once its anchor is snapped to the placement grid."""
    if not grid_um:
        return width
    return math.ceil(width / grid_um - EPS) * grid_um


def fits(widths, hw, gap_um=0.0, grid_um=None) -> bool:
    if not widths:
        return True
    need = sum(footprint(w, grid_um) for w in widths) + gap_um * (len(widths) - 1)
    return need <= hw.width_um + EPS


def first_fit(tiles, hw, gap_um=0.0, grid_um=None):
    """FIFO first-fit: index lists, one per bin."""
    bins = []
    for i, t in enumerate(tiles):
        for b in bins:
            if fits([tiles[j].width_um for j in b] + [t.width_um], hw, gap_um, grid_um):
                b.append(i)
                break
        else:
            bins.append([i])
    return bins


def _materialize(tiles, index_bins, hw):
    out = []
    for idx in index_bins:
        ts = [tiles[i] for i in sorted(idx)]
        out.append(Bin(ts, rho_spatial(ts, hw), rho_temporal(ts)))
    return out


def bundle(tiles, params: SAParams = SAParams(), hw=None, gap_um=0.0, grid_um=None):
    """Annealed partition of ``tiles`` into width-feasible bins.

    ``gap_um`` is the clearance kept between neighbouring tiles and
    ``grid_um`` the anchor granularity; both default to the bare
    sum-of-widths fit.
    """
    from .hwmodel import default_hardware

    hw = hw or default_hardware()
    tiles = list(tiles)
    if not tiles:
        return []
    for t in tiles:
        if not fits([t.width_um], hw, 0.0, grid_um):
            raise InfeasibleTile(t.label, f"({t.width_um} um > {hw.width_um} um)")

    alpha = params.alpha
    widths = [t.width_um for t in tiles]
    spatial = [footprint(w, grid_um) for w in widths]
    times = [t.est_time_us for t in tiles]

    def bin_ok(idx):
        return sum(spatial[i] for i in idx) + gap_um * (len(idx) - 1) <= hw.width_um + EPS

    def score(idx):
        rs = min(1.0, max(sum(widths[i] for i in idx) / hw.width_um, EPS))
        top = max(times[i] for i in idx)
        rt = 1.0 if top <= 0 else sum(times[i] for i in idx) / (len(idx) * top)
        return alpha * rs + (1.0 - alpha) * rt

    state = first_fit(tiles, hw, gap_um, grid_um)
    scores = [score(b) for b in state]
    cur = sum(scores) / len(state)
    base = cur if cur > 0 else 1.0
    best, best_val = [list(b) for b in state], cur
    rng = np.random.default_rng(params.seed)
    temp = params.t0
    n = len(tiles)
    stage = params.stage_length

    for it in range(params.iterations):
        where = {i: k for k, b in enumerate(state) for i in b}
        action = rng.integers(3)
        new = None
        if action == 0:  # move a tile to a new bin
            i = int(rng.integers(n))
            k = where[i]
            if len(state[k]) > 1:
                new = [list(b) for b in state]
                new[k].remove(i)
                new.append([i])
        elif action == 1:  # swap a tile with one from a different bin
            if len(state) > 1:
                i, j = (int(x) for x in rng.choice(n, size=2, replace=False))
                ki, kj = where[i], where[j]
                if ki != kj:
                    new = [list(b) for b in state]
                    new[ki][new[ki].index(i)] = j
                    new[kj][new[kj].index(j)] = i
        else:  # move a tile to an existing bin
            if len(state) > 1:
                i = int(rng.integers(n))
                ki = where[i]
                kj = int(rng.integers(len(state) - 1))
                kj = kj + 1 if kj >= ki else kj
                new = [list(b) for b in state]
                new[ki].remove(i)
                new[kj].append(i)
        if new is not None:
            new = [b for b in new if b]
            if all(bin_ok(b) for b in new):
                val = sum(score(b) for b in new) / len(new)
                delta = (val - cur) / base
                if delta >= 0 or rng.random() < math.exp(delta / temp):
                    state, cur = new, val
                    if cur > best_val + 1e-12:
                        best, best_val = [list(b) for b in state], cur
        if (it + 1) % stage == 0:
            temp *= params.gamma

    best = sorted((sorted(b) for b in best), key=lambda b: b[0])
    return _materialize(tiles, best, hw)


def first_fit_bins(tiles, hw, gap_um=0.0, grid_um=None):
    tiles = list(tiles)
    return _materialize(tiles, first_fit(tiles, hw, gap_um, grid_um), hw)


def manifest(bins) -> str:
    """Plain-text bin listing: one line per bin with its tile labels."""
    lines = []
    for k, b in enumerate(bins):
        lines.append(f"bin {k}: " + " ".join(b.labels))
    return "\n".join(lines) + "\n"
