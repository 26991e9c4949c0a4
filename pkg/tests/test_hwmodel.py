import dataclasses

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from multiq.errors import ParseError, ValidationError
from multiq.hwmodel import (
    HardwareConfig,
    default_hardware,
    emit_hardware,
    hardware_from_env,
    load_hardware,
    parse_hardware,
)


def test_reference_values():
    hw = default_hardware()
    assert hw.fidelity_2q == 0.995
    assert hw.t_init_ms == 82
    assert hw.t2_us == 1.5e6
    assert hw.t_transfer_us == 17
    assert hw.t_2q_us == 0.36


def test_override_file(tmp_path):
    p = tmp_path / "hw.cfg"
    p.write_text("width_um = 420\n")
    hw = load_hardware(p)
    assert hw.width_um == 420
    assert hw.replace(width_um=210.0) == default_hardware()


def test_out_of_range_fidelity(tmp_path):
    p = tmp_path / "hw.cfg"
    p.write_text("fidelity_2q = 1.2\n")
    with pytest.raises(ValidationError) as exc:
        load_hardware(p)
    assert exc.value.field == "fidelity_2q"


def test_empty_file_gives_defaults(tmp_path):
    p = tmp_path / "hw.cfg"
    p.write_text("")
    assert load_hardware(p) == default_hardware()


def test_units_are_converted():
    hw = parse_hardware("t2_us = 1.5 s\nt_2q_us = 360 ns\nwidth_um = 0.21 mm\n")
    assert hw.t2_us == pytest.approx(1.5e6)
    assert hw.t_2q_us == pytest.approx(0.36)
    assert hw.width_um == pytest.approx(210)


def test_unknown_key_is_rejected():
    with pytest.raises((ParseError, ValidationError)):
        parse_hardware("warp_drive = 9\n")


def test_env_variable(tmp_path, monkeypatch):
    p = tmp_path / "hw.cfg"
    p.write_text("n_aods = 2\n")
    monkeypatch.setenv("MULTIQ_HW", str(p))
    assert hardware_from_env().n_aods == 2
    monkeypatch.delenv("MULTIQ_HW")
    assert hardware_from_env() == default_hardware()


def test_negative_length_rejected():
    with pytest.raises(ValidationError):
        HardwareConfig(width_um=-1)


@settings(max_examples=60, deadline=None)
@given(
    width=st.floats(50, 5000, allow_nan=False),
    rows=st.sampled_from([1, 2]),
    f1=st.floats(0.5, 1.0),
    t2=st.floats(1.0, 1e8),
    aods=st.integers(1, 4),
)
def test_emit_load_roundtrip(width, rows, f1, t2, aods):
    hw = default_hardware().replace(width_um=width, storage_rows=rows, fidelity_1q=f1,
                                    t2_us=t2, n_aods=aods)
    back = parse_hardware(emit_hardware(hw))
    for f in dataclasses.fields(hw):
        assert getattr(back, f.name) == getattr(hw, f.name), f.name


def test_three_storage_rows_rejected():
    with pytest.raises(ValidationError):
        HardwareConfig(storage_rows=3)
