import pytest
from hypothesis import given
from hypothesis import strategies as st

from sliptsim.channel import WaterProperties
from sliptsim.errors import ConfigError, DomainError
from sliptsim.harvester import CellMode
from sliptsim.policy import (
    DualWavelengthPlan,
    PowerSplit,
    TimeSwitchSchedule,
    TxRole,
    assign_spatial,
    mode_at,
    split,
)

PV = CellMode.PHOTOVOLTAIC
PC = CellMode.PHOTOCONDUCTIVE


def test_schedule_basicities():
    s = TimeSwitchSchedule(0.5, 0.5)
    assert s.period == 1.0
    assert s.duty_cycle == 0.5
    assert TimeSwitchSchedule(3.0, 1.0).duty_cycle == 0.75
    with pytest.raises(DomainError):
        TimeSwitchSchedule(0.0, 0.0)
    with pytest.raises(DomainError):
        TimeSwitchSchedule(-1.0, 2.0)


def test_mode_at_walks_the_slots():
    s = TimeSwitchSchedule(0.5, 0.5)
    assert mode_at(s, 0.0) is PV
    assert mode_at(s, 0.49) is PV
    assert mode_at(s, 0.5) is PC  # slot boundary belongs to the next slot
    assert mode_at(s, 0.99) is PC
    assert mode_at(s, 1.0) is PV
    assert mode_at(s, 17.25) is PV
    assert mode_at(s, 17.75) is PC


def test_mode_at_degenerate_schedules():
    assert mode_at(TimeSwitchSchedule(1.0, 0.0), 123.4) is PV
    assert mode_at(TimeSwitchSchedule(0.0, 1.0), 123.4) is PC


def test_mode_at_phase_offset():
    s = TimeSwitchSchedule(0.5, 0.5, phase_offset=0.25)
    assert mode_at(s, 0.25) is PV
    assert mode_at(s, 0.75) is PC


# dyadic slot lengths and times keep t + period exact, so the property
# tests the slot walk rather than float rounding at boundaries
_DYADIC = st.integers(1, 32).map(lambda k: k * 0.25)


@given(_DYADIC, _DYADIC, st.integers(0, 400).map(lambda k: k * 0.25))
def test_mode_at_is_periodic(t1, t2, t):
    s = TimeSwitchSchedule(t1, t2)
    assert mode_at(s, t) is mode_at(s, t + s.period)


def test_power_split_bounds():
    with pytest.raises(ConfigError):
        PowerSplit(-0.01)
    with pytest.raises(ConfigError):
        PowerSplit(1.01)
    assert split(PowerSplit(0.0), 2.0) == (0.0, 2.0)
    assert split(PowerSplit(1.0), 2.0) == (2.0, 0.0)


def test_split_example():
    harvest, decode = split(PowerSplit(0.25), 2.0)
    assert harvest == 0.5
    assert decode == 1.5


@given(st.floats(0.0, 1.0), st.floats(0.0, 1e6))
def test_split_conserves_power_exactly(alpha, p):
    harvest, decode = split(PowerSplit(alpha), p)
    assert harvest + decode == p
    assert harvest >= 0.0 and decode >= 0.0


# -- spatial assignment -------------------------------------------------------


def _powers(rows):
    """rows: {(tx, rx): power}"""
    return rows


def test_two_tx_one_demanding_rx():
    # identical links: Data role goes to the lowest transmitter id
    lp = _powers({("t0", "r0"): 1.0, ("t1", "r0"): 1.0})
    a = assign_spatial(["t0", "t1"], ["r0"], {"r0": True}, lp, {"r0": 1e-6})
    assert a.roles == {"t0": TxRole.DATA, "t1": TxRole.ENERGY}
    assert a.data_source == {"r0": "t0"}
    assert a.target == {"t0": "r0", "t1": "r0"}
    assert a.mapping["r0"] == {"t0", "t1"}
    assert a.infeasible == []


def test_strongest_feasible_link_wins_data_role():
    lp = _powers({("t0", "r0"): 0.2, ("t1", "r0"): 0.9})
    a = assign_spatial(["t0", "t1"], ["r0"], {"r0": True}, lp, {"r0": 0.0})
    assert a.roles["t1"] is TxRole.DATA
    assert a.roles["t0"] is TxRole.ENERGY


def test_augmenting_path_preserves_feasibility():
    # r0 prefers t1 (0.9), but r1 can only be served by t1; the greedy
    # seed must be reassigned so both demands are met.
    lp = _powers({
        ("t0", "r0"): 0.5, ("t1", "r0"): 0.9,
        ("t0", "r1"): 0.0, ("t1", "r1"): 0.4,
    })
    sens = {"r0": 0.1, "r1": 0.1}
    a = assign_spatial(["t0", "t1"], ["r0", "r1"], {"r0": True, "r1": True}, lp, sens)
    assert a.infeasible == []
    assert a.data_source == {"r0": "t0", "r1": "t1"}


def test_truly_infeasible_rx_is_reported():
    lp = _powers({("t0", "r0"): 0.01, ("t0", "r1"): 0.9})
    a = assign_spatial(["t0"], ["r0", "r1"], {"r0": True, "r1": True}, lp,
                       {"r0": 0.1, "r1": 0.1})
    assert a.infeasible == ["r0"]
    assert a.data_source == {"r1": "t0"}


def test_energy_txs_point_at_their_best_receiver():
    lp = _powers({
        ("t0", "r0"): 0.3, ("t0", "r1"): 0.8,
        ("t1", "r0"): 0.6, ("t1", "r1"): 0.6,
    })
    a = assign_spatial(["t0", "t1"], ["r0", "r1"], {}, lp, {})
    assert a.roles == {"t0": TxRole.ENERGY, "t1": TxRole.ENERGY}
    assert a.target == {"t0": "r1", "t1": "r0"}  # t1 ties, lowest rx id wins
    assert a.harvested_power(lp) == pytest.approx(1.4)


def test_assign_requires_a_transmitter():
    with pytest.raises(DomainError):
        assign_spatial([], ["r0"], {}, {}, {})
    with pytest.raises(DomainError):
        assign_spatial(["t0"], ["r0"], {}, {}, {})  # missing link power


def test_dual_wavelength_plan_distinct():
    w = WaterProperties.preset("clear_ocean")
    plan = DualWavelengthPlan(450.0, 520.0, w, w)
    assert plan.energy_wavelength != plan.data_wavelength
    with pytest.raises(ConfigError):
        DualWavelengthPlan(450.0, 450.0, w, w)
