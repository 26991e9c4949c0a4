"""Device description for a zoned neutral-atom processor.

All lengths are micrometres and all times microseconds, except ``t_init_ms``
which keeps its millisecond unit. Config files are flat ``key = value [unit]``
text; values carrying a unit suffix are converted to the canonical unit of the
field at load time.
"""

from __future__ import annotations

import dataclasses
import math
import os
from dataclasses import dataclass, fields

from .errors import ParseError, ValidationError

ENV_VAR = "MULTIQ_HW"


@dataclass(frozen=True)
class HardwareConfig:
    width_um: float = 210.0
    height_um: float = 155.0
    storage_rows: int = 1
    storage_spacing_um: float = 3.0
    entanglement_site_spacing_um: float = 10.0
    pair_gap_um: float = 2.0
    blockade_radius_um: float = 3.0
    zone_separation_um: float = 20.0
    n_aods: int = 1
    fidelity_1q: float = 0.9991
    fidelity_2q: float = 0.995
    fidelity_transfer: float = 0.999
    t2_us: float = 1.5e6
    t_transfer_us: float = 17.0
    t_1q_us: float = 52.0
    t_2q_us: float = 0.36
    move_speed_um_per_us: float = 0.55
    move_accel_um_per_us2: float = 2.75e-3
    t_init_ms: float = 82.0
    aod_min_separation_um: float = 2.0

    def __post_init__(self):
        validate(self)

    def replace(self, **changes) -> "HardwareConfig":
        return dataclasses.replace(self, **changes)


# dimension of every field; drives unit conversion in the loader
_DIMENSION = {
    "width_um": "length",
    "height_um": "length",
    "storage_rows": "int",
    "storage_spacing_um": "length",
    "entanglement_site_spacing_um": "length",
    "pair_gap_um": "length",
    "blockade_radius_um": "length",
    "zone_separation_um": "length",
    "n_aods": "int",
    "fidelity_1q": "prob",
    "fidelity_2q": "prob",
    "fidelity_transfer": "prob",
    "t2_us": "time_us",
    "t_transfer_us": "time_us",
    "t_1q_us": "time_us",
    "t_2q_us": "time_us",
    "move_speed_um_per_us": "speed",
    "move_accel_um_per_us2": "accel",
    "t_init_ms": "time_ms",
    "aod_min_separation_um": "length",
}

# factor converting a suffixed value into the canonical unit of each dimension
_UNITS = {
    "length": {"um": 1.0, "nm": 1e-3, "mm": 1e3, "m": 1e6},
    "time_us": {"us": 1.0, "ns": 1e-3, "ms": 1e3, "s": 1e6},
    "time_ms": {"ms": 1.0, "us": 1e-3, "ns": 1e-6, "s": 1e3},
    # 1 m/s == 1 um/us
    "speed": {"um/us": 1.0, "m/s": 1.0},
    # 1 m/s^2 == 1e6 um / 1e12 us^2
    "accel": {"um/us^2": 1.0, "um/us2": 1.0, "m/s^2": 1e-6, "m/s2": 1e-6},
    "prob": {},
    "int": {},
}

_CANONICAL_UNIT = {
    "length": "um",
    "time_us": "us",
    "time_ms": "ms",
    "speed": "um/us",
    "accel": "um/us^2",
}


def validate(cfg: HardwareConfig) -> None:
    for f in fields(cfg):
        value = getattr(cfg, f.name)
        dim = _DIMENSION[f.name]
        if dim == "int":
            if not isinstance(value, int) or isinstance(value, bool) or value < 1:
                raise ValidationError(f.name, "must be a positive integer")
            continue
        if not isinstance(value, (int, float)) or not math.isfinite(value):
            raise ValidationError(f.name, "must be a finite number")
        if dim == "prob":
            if not 0.0 < value <= 1.0:
                raise ValidationError(f.name, "must lie in (0, 1]")
        elif value <= 0:
            raise ValidationError(f.name, "must be positive")
    if cfg.storage_rows not in (1, 2):
        raise ValidationError("storage_rows", "must be 1 or 2")
    if cfg.pair_gap_um >= cfg.blockade_radius_um:
        raise ValidationError("pair_gap_um", "must be smaller than blockade_radius_um")
    if cfg.entanglement_site_spacing_um <= cfg.blockade_radius_um:
        raise ValidationError(
            "entanglement_site_spacing_um", "must exceed blockade_radius_um"
        )


def default_hardware() -> HardwareConfig:
    """Reference device parameters."""
    return HardwareConfig()


def _parse_value(name, raw, lineno):
    dim = _DIMENSION[name]
    parts = raw.split()
    if not parts or len(parts) > 2:
        raise ParseError(lineno, f"cannot read value for '{name}'")
    number, unit = parts[0], (parts[1] if len(parts) == 2 else None)
    if dim == "int":
        if unit is not None:
            raise ParseError(lineno, f"'{name}' takes no unit")
        try:
            return int(number)
        except ValueError:
            raise ParseError(lineno, f"'{name}' must be an integer") from None
    try:
        value = float(number)
    except ValueError:
        raise ParseError(lineno, f"'{number}' is not a number") from None
    if unit is None:
        return value
    table = _UNITS[dim]
    if unit not in table:
        raise ParseError(lineno, f"unit '{unit}' not valid for '{name}'")
    return value * table[unit]


def parse_hardware(text: str) -> HardwareConfig:
    overrides = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(lineno, "expected 'key = value'")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in _DIMENSION:
            raise ParseError(lineno, f"unknown key '{key}'")
        if key in overrides:
            raise ParseError(lineno, f"duplicate key '{key}'")
        overrides[key] = _parse_value(key, raw, lineno)
    return HardwareConfig(**overrides)


def load_hardware(path) -> HardwareConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_hardware(fh.read())


def hardware_from_env() -> HardwareConfig:
    path = os.environ.get(ENV_VAR)
    return load_hardware(path) if path else default_hardware()


def emit_hardware(cfg: HardwareConfig) -> str:
    lines = []
    for f in fields(cfg):
        value = getattr(cfg, f.name)
        unit = _CANONICAL_UNIT.get(_DIMENSION[f.name])
        text = repr(value)
        lines.append(f"{f.name} = {text} {unit}" if unit else f"{f.name} = {text}")
    return "\n".join(lines) + "\n"
