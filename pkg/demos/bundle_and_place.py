"""
Bundling tiles into bins and anchoring them
===========================================

Compile the whole corpus, let simulated annealing group the tiles into
bins that fill the device width and have similar runtimes, and compare
against plain first-fit. Then place each bin and print the anchors.
"""

from multiq import default_hardware
from multiq.backend import compile_circuit
from multiq.bundler import SAParams, first_fit_bins, objective
from multiq.corpus import load_corpus
from multiq.frontend import rebase_to_native
from multiq.pipeline import RunManifest, bundle_and_place

hw = default_hardware()
tiles = [compile_circuit(rebase_to_native(e.circuit), 0.4, hw, label=e.name)
         for e in load_corpus()]
for t in tiles:
    print(f"{t.label:14s} {t.width_um:6.1f} um  {t.est_time_us:8.1f} us")

gap = hw.storage_spacing_um
ff = first_fit_bins(tiles, hw, gap, gap)
print(f"\nfirst-fit: {len(ff)} bins, objective {objective(ff, hw, 0.6):.3f}")

placed = bundle_and_place(tiles, RunManifest(), hw)
bins = [b for b, _ in placed]
print(f"annealed:  {len(bins)} bins, objective {objective(bins, hw, 0.6):.3f}")

for k, (b, pl) in enumerate(placed):
    print(f"\nbin {k}: rho_s={b.rho_s:.2f} rho_t={b.rho_t:.2f}"
          f" placement energy {pl.energy:.1f}")
    for t, (x, y) in sorted(zip(b.tiles, pl.anchors), key=lambda p: p[1][0]):
        print(f"  x={x:6.1f}  {t.label}")
