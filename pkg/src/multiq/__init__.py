"""Multi-programming compiler toolchain for zoned neutral-atom processors."""

from .hwmodel import HardwareConfig, default_hardware, load_hardware
from .frontend import Circuit, Gate, parse_openqasm, rebase_to_native, build_dag
from .planner import split_layers, plan_layout
from .backend import compile_tile, compile_circuit
from .bundler import SAParams, bundle
from .placer import place, batch_compatible
from .orchestrator import merge
from .checker import check, oracle_equiv

__version__ = "0.1.0"
