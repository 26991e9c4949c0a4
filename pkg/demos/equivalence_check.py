"""
Checking that sharing the device changes nothing
================================================

Merge two tiles, pull each tenant's gates back out of the shared program
and compare against the source circuit with ZX rewriting. A one-angle
corruption of the shared program is caught.
"""

import math

from multiq import default_hardware
from multiq.backend import compile_circuit
from multiq.checker import check, reconstruct
from multiq.frontend import CZ, U3, Circuit
from multiq.ir import NAProgram, U3Batch
from multiq.orchestrator import merge

hw = default_hardware()
h = (math.pi / 2, 0.0, math.pi)
bell = Circuit(2, [U3(*h, 1), CZ(0, 1), U3(*h, 1)], "bell")
chain = Circuit(3, [U3(0.1, 0.2, 0.3, 0), CZ(0, 2), CZ(1, 2)], "chain")

a = compile_circuit(bell, 0.4, hw, label="bell")
b = compile_circuit(chain, 0.4, hw, label="chain")
sched = merge([a, b], [(0.0, 0.0), (15.0, 0.0)], hw)

for t in (a, b):
    rec = reconstruct(sched.program, sched.tile_qubits(t.label), hw)
    v = check(t.circuit, sched, sched.tile_qubits(t.label), hw, oracle_limit=0)
    print(f"{t.label}: {len(rec.gates)} reconstructed gates, equivalent={v.equivalent}"
          f" ({v.method})")

# nudge one angle of the first single-qubit batch
instrs = list(sched.program.instructions)
k = next(i for i, ins in enumerate(instrs) if isinstance(ins, U3Batch))
angles = [list(x) for x in instrs[k].angles]
angles[0][2] += 1e-3
instrs[k] = U3Batch(instrs[k].sites, [tuple(x) for x in angles])
bad = NAProgram(instrs, dict(sched.program.qubit_map))

print("\nafter corrupting one angle:")
for t in (a, b):
    v = check(t.circuit, bad, sched.tile_qubits(t.label), hw, oracle_limit=0)
    print(f"{t.label}: equivalent={v.equivalent} ({v.method})")
