"""
Compiling one circuit into a tile
=================================

Take a Hamiltonian-simulation instance from the bundled corpus, look at how the width knob
p_w trades footprint for parallelism, then compile it and inspect the
zoned program it produces.
"""

from multiq import default_hardware
from multiq.backend import compile_circuit
from multiq.corpus import load_corpus
from multiq.frontend import rebase_to_native
from multiq.ir import Move, Rydberg, U3Batch, emit_na
from multiq.planner import plan_layout

hw = default_hardware()
entry = next(e for e in load_corpus() if e.name == "hamsim_4")
circ = rebase_to_native(entry.circuit)
print(f"{entry.name}: {circ.n_qubits} qubits, {len(circ.gates)} native gates")

# narrow tiles pack better, wide ones fire more CZs per pulse
for p_w in (0.0, 0.25, 0.5, 0.75, 1.0):
    lay = plan_layout(circ, p_w, hw)
    print(f"  p_w={p_w:.2f}  width {lay.w_selected:6.1f} um"
          f"  (min {lay.w_min}, best {lay.w_best})")

tile = compile_circuit(circ, 0.4, hw, label=entry.name)
instrs = tile.program.instructions
print(f"\ntile: {tile.width_um} um wide, {tile.n_stages} stages,"
      f" estimated {tile.est_time_us:.1f} us")
print(f"  {sum(isinstance(i, Move) for i in instrs)} move batches,"
      f" {sum(isinstance(i, Rydberg) for i in instrs)} Rydberg pulses,"
      f" {sum(isinstance(i, U3Batch) for i in instrs)} single-qubit batches")

# the first few lines of the textual program
print()
print("\n".join(emit_na(tile.program).splitlines()[:8]))
