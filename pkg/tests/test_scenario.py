import json
from pathlib import Path

import pytest

from sliptsim.errors import ConfigError
from sliptsim.scenario import (
    build_scenario,
    load_scenario,
    scenario_hash,
    validate_scenario,
)

SCENARIOS = Path(__file__).resolve().parents[1] / "scenarios"


def _minimal(**over):
    cfg = {
        "duration": "10s",
        "seed": 1,
        "nodes": [{"id": "n0", "store": {"type": "battery", "capacity": "10J"}}],
    }
    cfg.update(over)
    return cfg


@pytest.mark.parametrize("name", [
    "tank_1m5", "vertical_supercap", "turbulent_demo", "spatial_demo",
])
def test_bundled_scenarios_load_and_validate(name):
    path = SCENARIOS / f"{name}.json"
    sc = load_scenario(path)
    assert sc.name  # taken from the file, falls back to the stem
    assert sc.duration > 0
    assert sc.seed is not None
    assert validate_scenario(json.loads(path.read_text())) == []


def test_tank_scenario_contents():
    sc = load_scenario(SCENARIOS / "tank_1m5.json")
    assert sc.duration == pytest.approx(130 * 60)
    assert sc.seed == 42
    (tx,) = sc.transmitters
    assert tx.beam.geometry.distance == pytest.approx(1.5)
    (node,) = sc.nodes
    assert node.policy.kind == "protocol"
    assert node.v_threshold == pytest.approx(3.6)
    assert node.store.capacity == pytest.approx(3024.0)  # 840 mWh


def test_unknown_keys_are_rejected_with_a_path():
    with pytest.raises(ConfigError, match="scenario"):
        build_scenario(_minimal(gravity="9.8"))
    cfg = _minimal()
    cfg["nodes"][0]["store"]["capacty"] = "1J"
    with pytest.raises(ConfigError, match=r"nodes\[0\].store"):
        build_scenario(cfg)


def test_wrong_unit_kind_names_the_path():
    cfg = _minimal(transmitters=[{
        "power": "5kg", "water": "pure_sea",
        "receiver_radius": "1mm", "distance": "1m",
    }])
    with pytest.raises(ConfigError, match=r"transmitters\[0\].power"):
        build_scenario(cfg)


def test_duration_and_seed_validation():
    with pytest.raises(ConfigError, match="duration"):
        build_scenario(_minimal(duration="0s"))
    with pytest.raises(ConfigError, match="seed"):
        build_scenario(_minimal(seed=True))
    with pytest.raises(ConfigError, match="seed"):
        build_scenario(_minimal(seed="42"))
    sc = build_scenario(_minimal(seed=None))  # allowed; engine demands one later
    assert sc.seed is None


def test_duplicate_ids_rejected():
    cfg = _minimal()
    cfg["nodes"].append({"id": "n0", "store": {"type": "battery", "capacity": "1J"}})
    with pytest.raises(ConfigError, match="duplicate node ids"):
        build_scenario(cfg)
    cfg = _minimal(transmitters=[
        {"id": "t", "power": "1W", "water": "pure_sea",
         "receiver_radius": "1mm", "distance": "1m"},
        {"id": "t", "power": "1W", "water": "pure_sea",
         "receiver_radius": "1mm", "distance": "1m"},
    ])
    with pytest.raises(ConfigError, match="duplicate transmitter ids"):
        build_scenario(cfg)


def test_dangling_references_rejected():
    tx = {"id": "t", "power": "1W", "water": "pure_sea",
          "receiver_radius": "1mm", "distance": "1m"}
    with pytest.raises(ConfigError, match="ghost"):
        build_scenario(_minimal(transmitters=[{**tx, "targets": ["ghost"]}]))
    with pytest.raises(ConfigError, match="ghost"):
        build_scenario(_minimal(transmitters=[{**tx, "distances": {"ghost": "1m"}}]))
    with pytest.raises(ConfigError, match="ghost"):
        build_scenario(_minimal(
            stimuli=[{"time": "1s", "node": "ghost", "stimulus": "timeout"}]))


def test_spatial_constraints():
    cfg = _minimal(policy={"kind": "spatial", "t1": "1s", "t2": "1s"})
    with pytest.raises(ConfigError, match="at least one transmitter"):
        build_scenario(cfg)
    cfg = _minimal(
        policy={"kind": "spatial", "t1": "1s", "t2": "1s"},
        transmitters=[{"power": "1W", "water": "pure_sea",
                       "receiver_radius": "1mm", "distance": "1m"}],
    )
    cfg["nodes"].append({
        "id": "n1",
        "store": {"type": "battery", "capacity": "1J"},
        "policy": {"kind": "protocol"},
    })
    with pytest.raises(ConfigError, match="every node"):
        build_scenario(cfg)


def test_policy_validation():
    with pytest.raises(ConfigError, match="kind"):
        build_scenario(_minimal(policy={"kind": "osmotic"}))
    with pytest.raises(ConfigError, match="t2"):
        build_scenario(_minimal(policy={"kind": "time_switch", "t1": "1s"}))
    with pytest.raises(ConfigError, match="alpha"):
        build_scenario(_minimal(policy={"kind": "power_split", "alpha": 1.2}))
    with pytest.raises(ConfigError, match="alpha"):
        build_scenario(_minimal(policy={"kind": "power_split", "alpha": "half"}))


def test_dual_wavelengths_must_differ():
    cfg = _minimal(transmitters=[{
        "receiver_radius": "1mm", "distance": "1m",
        "dual": {
            "energy": {"power": "1W", "wavelength": "450nm", "water": "pure_sea"},
            "data": {"power": "1W", "wavelength": "450nm", "water": "pure_sea"},
        },
    }])
    with pytest.raises(ConfigError, match="distinct wavelengths"):
        build_scenario(cfg)


def test_water_and_turbulence_forms():
    tx = {"power": "1W", "receiver_radius": "1mm", "distance": "1m"}
    with pytest.raises(ConfigError, match="water"):
        build_scenario(_minimal(transmitters=[{**tx, "water": "lemonade"}]))
    with pytest.raises(ConfigError, match="scattering"):
        build_scenario(_minimal(transmitters=[{**tx, "water": {"absorption": "0.1/m"}}]))
    sc = build_scenario(_minimal(transmitters=[{
        **tx,
        "water": {"absorption": "0.1/m", "scattering": "0.05/m"},
        "turbulence": {"sigma2": 0.3, "stream": "fading:custom"},
    }]))
    beam = sc.transmitters[0].beam
    assert beam.water.total_attenuation == pytest.approx(0.15)
    assert beam.turbulence.scintillation_index == 0.3
    assert beam.turbulence.rng_stream_id == "fading:custom"
    with pytest.raises(ConfigError, match="turbulence"):
        build_scenario(_minimal(transmitters=[{
            **tx, "water": "pure_sea", "turbulence": -0.5}]))


def test_load_defaults_depend_on_policy():
    sc = build_scenario(_minimal())
    assert sc.nodes[0].active_load == "sense_and_save"  # protocol default
    sc = build_scenario(_minimal(policy={"kind": "power_split", "alpha": 0.5}))
    assert sc.nodes[0].active_load == "sleep"  # policy nodes idle by default
    cfg = _minimal()
    cfg["nodes"][0]["load"] = "soc_mcu_3mhz"
    assert build_scenario(cfg).nodes[0].active_load == "soc_mcu_3mhz"
    cfg["nodes"][0]["load"] = "antimatter"
    with pytest.raises(ConfigError, match="unknown load profile"):
        build_scenario(cfg)


def test_command_and_sensor_validation():
    cfg = _minimal()
    cfg["nodes"][0]["commands"] = [{"op": "self_destruct"}]
    with pytest.raises(ConfigError, match="unknown op"):
        build_scenario(cfg)
    cfg["nodes"][0]["commands"] = [{"op": "sensor_on", "sensor": 256}]
    with pytest.raises(ConfigError, match="one byte"):
        build_scenario(cfg)
    cfg = _minimal()
    cfg["nodes"][0]["sensors"] = {"enabled": [1], "values": {"1": [[2, 5.0], [1, 6.0]]}}
    with pytest.raises(ConfigError, match="sorted"):
        build_scenario(cfg)
    cfg["nodes"][0]["sensors"] = {"enabled": [1], "values": {"one": 5.0}}
    with pytest.raises(ConfigError, match="sensor ids must be integers"):
        build_scenario(cfg)


def test_unknown_stimulus_rejected():
    cfg = _minimal(stimuli=[{"time": "1s", "node": "n0", "stimulus": "earthquake"}])
    with pytest.raises(ConfigError, match="unknown stimulus"):
        build_scenario(cfg)


def test_hash_is_canonical():
    a = {"duration": "10s", "seed": 1, "nodes": []}
    b = {"seed": 1, "nodes": [], "duration": "10s"}  # same content, new order
    assert scenario_hash(a) == scenario_hash(b)
    assert scenario_hash({**a, "seed": 2}) != scenario_hash(a)
    assert len(scenario_hash(a)) == 64


def test_built_scenario_carries_its_hash():
    cfg = _minimal()
    sc = build_scenario(cfg)
    assert sc.scenario_hash == scenario_hash(cfg)


def test_validate_collects_multiple_issues():
    cfg = _minimal(transmitters=[{
        "power": "5kg", "water": "pure_sea",
        "receiver_radius": "1mm", "distance": "1m",
    }])
    cfg["nodes"][0]["store"]["capacty"] = "1J"
    issues = validate_scenario(cfg)
    assert len(issues) == 2
    assert any("transmitters[0].power" in i for i in issues)
    assert any("nodes[0].store" in i for i in issues)


def test_validate_surfaces_cross_references_last():
    cfg = _minimal(stimuli=[{"time": "1s", "node": "ghost", "stimulus": "timeout"}])
    issues = validate_scenario(cfg)
    assert issues == ["stimuli[0].node: unknown node 'ghost'"]
    assert validate_scenario("not a dict") == ["scenario: expected a JSON object"]
    assert validate_scenario(_minimal()) == []


def test_load_scenario_file_errors(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_scenario(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError, match="invalid JSON"):
        load_scenario(bad)
    top = tmp_path / "list.json"
    top.write_text("[1, 2]")
    with pytest.raises(ConfigError, match="JSON object"):
        load_scenario(top)
