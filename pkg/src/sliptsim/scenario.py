"""Scenario files: parsing, validation, canonical hashing.

A scenario is a JSON object with unit-suffixed quantities ("840mWh",
"1.5m", "30kHz").  This module turns one into the runtime Scenario the
engine consumes, strictly: unknown keys, missing required fields, bad
units and dangling references are all ConfigErrors that name the
config path they occurred at.  validate_scenario collects such issues
into a report instead of raising on the first.
"""

import hashlib
import json
from pathlib import Path

from sliptsim.channel import BeamGeometry, LinkParams, TurbulenceModel, WaterProperties
from sliptsim.energy_store import Battery, Supercapacitor
from sliptsim.engine import NodeDef, PolicyDef, Scenario, StimulusDef, TransmitterDef
from sliptsim.errors import ConfigError, DomainError
from sliptsim.harvester import SolarCell
from sliptsim.node import LOAD_CATALOG, Command, Opcode, Stimulus
from sliptsim.policy import PowerSplit, TimeSwitchSchedule
from sliptsim.units import parse_quantity

_OPCODES = {
    "sensor_on": Opcode.SENSOR_ON,
    "sensor_off": Opcode.SENSOR_OFF,
    "send_data": Opcode.SEND_DATA,
    "retransmit": Opcode.RETRANSMIT,
}

_TOP_KEYS = {"name", "duration", "seed", "policy", "transmitters", "nodes", "stimuli"}
_TX_KEYS = {
    "id", "power", "wavelength", "water", "beam_waist", "divergence", "distance",
    "distances", "receiver_radius", "turbulence", "on", "off", "targets", "dual",
}
_DUAL_BEAM_KEYS = {"power", "wavelength", "water", "turbulence"}
_NODE_KEYS = {
    "id", "cell", "store", "policy", "v_threshold", "sensors", "load",
    "active_load", "sleep_load", "uplink", "data_demand", "commands",
}
_CELL_KEYS = {
    "area", "efficiency", "decode_rate", "decode_bandwidth", "sensitivity",
    "switch_latency",
}
_BATTERY_KEYS = {"type", "capacity", "stored", "v_empty", "v_full"}
_SUPERCAP_KEYS = {"type", "capacitance", "rated_voltage", "stored"}
_SENSORS_KEYS = {"enabled", "values", "seconds_per_sensor"}
_UPLINK_KEYS = {"rate", "load", "record_bits"}
_POLICY_KEYS = {
    "protocol": {"kind"},
    "time_switch": {"kind", "t1", "t2", "phase_offset"},
    "power_split": {"kind", "alpha"},
    "dual_wavelength": {"kind"},
    "spatial": {"kind", "t1", "t2", "phase_offset"},
}
_STIMULUS_KEYS = {"time", "node", "stimulus"}
_COMMAND_KEYS = {"op", "sensor"}


def scenario_hash(cfg: dict) -> str:
    """SHA-256 of the canonical (sorted-key, no-whitespace) JSON form."""
    canonical = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


# -- low-level helpers --------------------------------------------------------


def _check_keys(obj: dict, allowed: set, path: str):
    if not isinstance(obj, dict):
        raise ConfigError(path, f"expected an object, got {type(obj).__name__}")
    unknown = sorted(set(obj) - allowed)
    if unknown:
        raise ConfigError(
            path,
            f"unknown key(s) {', '.join(unknown)} (allowed: {', '.join(sorted(allowed))})",
        )


def _require(obj: dict, key: str, path: str):
    if key not in obj:
        raise ConfigError(path, f"missing required key {key!r}")
    return obj[key]


def _qty(obj: dict, key: str, kind: str, path: str, default=None) -> float:
    if key not in obj:
        if default is None:
            raise ConfigError(path, f"missing required key {key!r}")
        return default
    return parse_quantity(obj[key], kind, f"{path}.{key}")


def _str_field(obj: dict, key: str, path: str, default: str) -> str:
    value = obj.get(key, default)
    if not isinstance(value, str):
        raise ConfigError(f"{path}.{key}", "expected a string")
    return value


def _load_name(obj: dict, key: str, path: str, default: str) -> str:
    name = _str_field(obj, key, path, default)
    if name not in LOAD_CATALOG:
        raise ConfigError(
            f"{path}.{key}",
            f"unknown load profile {name!r} (have: {', '.join(sorted(LOAD_CATALOG))})",
        )
    return name


def _water(value, path: str) -> WaterProperties:
    try:
        if isinstance(value, str):
            return WaterProperties.preset(value)
        if isinstance(value, dict):
            _check_keys(value, {"absorption", "scattering"}, path)
            return WaterProperties(
                parse_quantity(_require(value, "absorption", path), "per_length",
                               f"{path}.absorption"),
                parse_quantity(_require(value, "scattering", path), "per_length",
                               f"{path}.scattering"),
            )
    except DomainError as e:
        raise ConfigError(path, str(e)) from None
    raise ConfigError(path, "expected a water preset name or an object with "
                            "absorption/scattering")


def _turbulence(value, path: str, stream_default: str = "") -> TurbulenceModel:
    stream = stream_default
    if isinstance(value, dict):
        _check_keys(value, {"sigma2", "stream"}, path)
        stream = _str_field(value, "stream", path, stream_default)
        value = _require(value, "sigma2", path)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(path, "scintillation index must be a number")
    try:
        return TurbulenceModel(float(value), stream)
    except DomainError as e:
        raise ConfigError(path, str(e)) from None


# -- section builders ---------------------------------------------------------


def _build_policy(obj, path: str) -> PolicyDef:
    if not isinstance(obj, dict):
        raise ConfigError(path, "expected a policy object with a 'kind'")
    kind = obj.get("kind")
    if kind not in _POLICY_KEYS:
        raise ConfigError(
            f"{path}.kind",
            f"unknown policy kind {kind!r} (have: {', '.join(sorted(_POLICY_KEYS))})",
        )
    _check_keys(obj, _POLICY_KEYS[kind], path)
    try:
        if kind in ("time_switch", "spatial"):
            schedule = TimeSwitchSchedule(
                _qty(obj, "t1", "time", path),
                _qty(obj, "t2", "time", path),
                _qty(obj, "phase_offset", "time", path, default=0.0),
            )
            return PolicyDef(kind=kind, schedule=schedule)
        if kind == "power_split":
            alpha = obj.get("alpha")
            if isinstance(alpha, bool) or not isinstance(alpha, (int, float)):
                raise ConfigError(f"{path}.alpha", "expected a number in [0, 1]")
            return PolicyDef(kind=kind, power_split=PowerSplit(float(alpha)))
    except DomainError as e:
        raise ConfigError(path, str(e)) from None
    return PolicyDef(kind=kind)


def _build_beam(tx_obj: dict, beam_obj: dict, path: str, geometry: BeamGeometry,
                default_turbulence: TurbulenceModel) -> LinkParams:
    try:
        return LinkParams(
            tx_power=_qty(beam_obj, "power", "power", path),
            wavelength=_qty(beam_obj, "wavelength", "wavelength", path, default=450.0),
            water=_water(_require(beam_obj, "water", path), f"{path}.water"),
            geometry=geometry,
            turbulence=(
                _turbulence(beam_obj["turbulence"], f"{path}.turbulence")
                if "turbulence" in beam_obj
                else default_turbulence
            ),
        )
    except DomainError as e:
        raise ConfigError(path, str(e)) from None


def _build_transmitter(obj, index: int) -> TransmitterDef:
    path = f"transmitters[{index}]"
    _check_keys(obj, _TX_KEYS, path)
    tx_id = _str_field(obj, "id", path, f"tx{index}")
    try:
        geometry = BeamGeometry(
            initial_radius=_qty(obj, "beam_waist", "length", path, default=0.0),
            half_angle_divergence=_qty(obj, "divergence", "angle", path, default=0.0),
            receiver_aperture_radius=_qty(obj, "receiver_radius", "length", path),
            distance=_qty(obj, "distance", "length", path),
        )
    except DomainError as e:
        raise ConfigError(path, str(e)) from None
    turbulence = _turbulence(obj.get("turbulence", 0.0), f"{path}.turbulence")

    dual_energy = dual_data = None
    if "dual" in obj:
        dual = obj["dual"]
        _check_keys(dual, {"energy", "data"}, f"{path}.dual")
        e_obj = _require(dual, "energy", f"{path}.dual")
        d_obj = _require(dual, "data", f"{path}.dual")
        _check_keys(e_obj, _DUAL_BEAM_KEYS, f"{path}.dual.energy")
        _check_keys(d_obj, _DUAL_BEAM_KEYS, f"{path}.dual.data")
        dual_energy = _build_beam(obj, e_obj, f"{path}.dual.energy", geometry, turbulence)
        dual_data = _build_beam(obj, d_obj, f"{path}.dual.data", geometry, turbulence)
        if dual_energy.wavelength == dual_data.wavelength:
            raise ConfigError(f"{path}.dual",
                              "energy and data beams must use distinct wavelengths")
        beam = dual_energy  # placeholder; dual links are built from the pair
    else:
        beam = _build_beam(obj, obj, path, geometry, turbulence)

    targets = obj.get("targets")
    if targets is not None:
        if not isinstance(targets, list) or not all(isinstance(x, str) for x in targets):
            raise ConfigError(f"{path}.targets", "expected a list of node ids")

    distances = {}
    for node_id, d in (obj.get("distances") or {}).items():
        distances[node_id] = parse_quantity(d, "length", f"{path}.distances.{node_id}")

    off = obj.get("off")
    return TransmitterDef(
        tx_id=tx_id,
        beam=beam,
        on_time=_qty(obj, "on", "time", path, default=0.0),
        off_time=None if off is None else _qty(obj, "off", "time", path),
        targets=targets,
        dual_energy=dual_energy,
        dual_data=dual_data,
        distances=distances,
    )


def _build_cell(obj, path: str) -> SolarCell:
    if obj is None:
        return SolarCell()
    _check_keys(obj, _CELL_KEYS, path)
    efficiency = obj.get("efficiency", 0.2)
    if isinstance(efficiency, bool) or not isinstance(efficiency, (int, float)):
        raise ConfigError(f"{path}.efficiency", "expected a number in (0, 1]")
    try:
        return SolarCell(
            area=_qty(obj, "area", "area", path, default=SolarCell().area),
            conversion_efficiency=float(efficiency),
            decode_bandwidth=_qty(obj, "decode_bandwidth", "frequency", path,
                                  default=30e3),
            decode_rate=_qty(obj, "decode_rate", "rate", path, default=500e3),
            sensitivity=_qty(obj, "sensitivity", "power", path, default=1e-6),
            switch_latency=_qty(obj, "switch_latency", "time", path, default=5e-3),
        )
    except DomainError as e:
        raise ConfigError(path, str(e)) from None


def _build_store(obj, path: str):
    if not isinstance(obj, dict) or "type" not in obj:
        raise ConfigError(path, "expected a store object with a 'type'")
    kind = obj["type"]
    try:
        if kind == "battery":
            _check_keys(obj, _BATTERY_KEYS, path)
            return Battery(
                capacity=_qty(obj, "capacity", "energy", path),
                stored=_qty(obj, "stored", "energy", path, default=0.0),
                v_empty=_qty(obj, "v_empty", "voltage", path, default=3.0),
                v_full=_qty(obj, "v_full", "voltage", path, default=4.2),
            )
        if kind == "supercapacitor":
            _check_keys(obj, _SUPERCAP_KEYS, path)
            return Supercapacitor(
                capacitance=_qty(obj, "capacitance", "capacitance", path, default=5.0),
                rated_voltage=_qty(obj, "rated_voltage", "voltage", path, default=5.0),
                stored=_qty(obj, "stored", "energy", path, default=0.0),
            )
    except DomainError as e:
        raise ConfigError(path, str(e)) from None
    raise ConfigError(f"{path}.type",
                      f"unknown store type {kind!r} (have: battery, supercapacitor)")


def _build_commands(obj, path: str) -> list[Command]:
    if obj is None:
        return []
    if not isinstance(obj, list):
        raise ConfigError(path, "expected a list of command objects")
    commands = []
    for i, c in enumerate(obj):
        cpath = f"{path}[{i}]"
        _check_keys(c, _COMMAND_KEYS, cpath)
        op = _require(c, "op", cpath)
        if op not in _OPCODES:
            raise ConfigError(f"{cpath}.op",
                              f"unknown op {op!r} (have: {', '.join(sorted(_OPCODES))})")
        sensor = c.get("sensor", 0)
        if isinstance(sensor, bool) or not isinstance(sensor, int):
            raise ConfigError(f"{cpath}.sensor", "expected an integer sensor id")
        try:
            commands.append(Command(_OPCODES[op], sensor))
        except DomainError as e:
            raise ConfigError(cpath, str(e)) from None
    return commands


def _build_sensors(obj, path: str):
    """Returns (enabled_ids, values, seconds_per_sensor)."""
    if obj is None:
        return set(), {}, 2.0
    _check_keys(obj, _SENSORS_KEYS, path)
    enabled = obj.get("enabled", [])
    if (not isinstance(enabled, list)
            or not all(isinstance(x, int) and not isinstance(x, bool) for x in enabled)):
        raise ConfigError(f"{path}.enabled", "expected a list of integer sensor ids")
    values = {}
    for key, src in (obj.get("values") or {}).items():
        vpath = f"{path}.values.{key}"
        try:
            sensor_id = int(key)
        except ValueError:
            raise ConfigError(vpath, "sensor ids must be integers") from None
        if isinstance(src, (int, float)) and not isinstance(src, bool):
            values[sensor_id] = float(src)
        elif isinstance(src, list):
            series = []
            for j, point in enumerate(src):
                if not isinstance(point, list) or len(point) != 2:
                    raise ConfigError(f"{vpath}[{j}]", "expected a [time, value] pair")
                t = parse_quantity(point[0], "time", f"{vpath}[{j}]")
                if not isinstance(point[1], (int, float)) or isinstance(point[1], bool):
                    raise ConfigError(f"{vpath}[{j}]", "value must be a number")
                if series and t < series[-1][0]:
                    raise ConfigError(f"{vpath}[{j}]", "series times must be sorted")
                series.append((t, float(point[1])))
            values[sensor_id] = series
        else:
            raise ConfigError(vpath, "expected a number or a [[time, value], ...] series")
    per = _qty(obj, "seconds_per_sensor", "time", path, default=2.0)
    return set(enabled), values, per


def _build_node(obj, index: int, default_policy: PolicyDef) -> NodeDef:
    path = f"nodes[{index}]"
    _check_keys(obj, _NODE_KEYS, path)
    node_id = _str_field(obj, "id", path, f"node{index}")
    policy = (_build_policy(obj["policy"], f"{path}.policy")
              if "policy" in obj else default_policy)
    enabled, values, per = _build_sensors(obj.get("sensors"), f"{path}.sensors")

    uplink = obj.get("uplink") or {}
    _check_keys(uplink, _UPLINK_KEYS, f"{path}.uplink")
    record_bits = uplink.get("record_bits", 128)
    if isinstance(record_bits, bool) or not isinstance(record_bits, int) or record_bits <= 0:
        raise ConfigError(f"{path}.uplink.record_bits", "expected a positive integer")

    if policy.kind == "protocol":
        default_active = "sense_and_save"
    else:
        default_active = "sleep"
    active_load = _load_name(obj, "load", path, default_active)
    if "active_load" in obj:
        active_load = _load_name(obj, "active_load", path, default_active)

    data_demand = obj.get("data_demand", False)
    if not isinstance(data_demand, bool):
        raise ConfigError(f"{path}.data_demand", "expected true or false")

    return NodeDef(
        node_id=node_id,
        cell=_build_cell(obj.get("cell"), f"{path}.cell"),
        store=_build_store(_require(obj, "store", path), f"{path}.store"),
        policy=policy,
        v_threshold=_qty(obj, "v_threshold", "voltage", path, default=3.6),
        enabled_sensors=enabled,
        active_load=active_load,
        sleep_load=_load_name(obj, "sleep_load", path, "sleep"),
        sense_seconds_per_sensor=per,
        sensor_values=values,
        uplink_rate=_qty(uplink, "rate", "rate", f"{path}.uplink", default=500e3),
        uplink_load=_load_name(uplink, "load", f"{path}.uplink", "laser_uplink"),
        record_bits=record_bits,
        data_demand=data_demand,
        commands=_build_commands(obj.get("commands"), f"{path}.commands"),
    )


def _build_stimulus(obj, index: int) -> StimulusDef:
    path = f"stimuli[{index}]"
    _check_keys(obj, _STIMULUS_KEYS, path)
    name = _require(obj, "stimulus", path)
    try:
        stim = Stimulus(name)
    except ValueError:
        valid = ", ".join(s.value for s in Stimulus)
        raise ConfigError(f"{path}.stimulus",
                          f"unknown stimulus {name!r} (have: {valid})") from None
    return StimulusDef(
        time=_qty(obj, "time", "time", path),
        node_id=_str_field(obj, "node", path, ""),
        stimulus=stim,
    )


# -- public API ---------------------------------------------------------------


def build_scenario(cfg: dict, default_name: str = "scenario") -> Scenario:
    """Turn a parsed config dict into a runtime Scenario (strict)."""
    _check_keys(cfg, _TOP_KEYS, "scenario")
    name = _str_field(cfg, "name", "scenario", default_name)
    duration = _qty(cfg, "duration", "time", "scenario")
    if duration <= 0:
        raise ConfigError("scenario.duration", "must be > 0")
    seed = cfg.get("seed")
    if seed is not None and (isinstance(seed, bool) or not isinstance(seed, int)):
        raise ConfigError("scenario.seed", "expected an integer")

    default_policy = (_build_policy(cfg["policy"], "scenario.policy")
                      if "policy" in cfg else PolicyDef(kind="protocol"))

    tx_list = cfg.get("transmitters", [])
    if not isinstance(tx_list, list):
        raise ConfigError("scenario.transmitters", "expected a list")
    transmitters = [_build_transmitter(t, i) for i, t in enumerate(tx_list)]

    node_list = cfg.get("nodes", [])
    if not isinstance(node_list, list):
        raise ConfigError("scenario.nodes", "expected a list")
    nodes = [_build_node(n, i, default_policy) for i, n in enumerate(node_list)]

    stim_list = cfg.get("stimuli", [])
    if not isinstance(stim_list, list):
        raise ConfigError("scenario.stimuli", "expected a list")
    stimuli = [_build_stimulus(s, i) for i, s in enumerate(stim_list)]

    # cross references
    node_ids = [n.node_id for n in nodes]
    if len(set(node_ids)) != len(node_ids):
        raise ConfigError("scenario.nodes", "duplicate node ids")
    tx_ids = [t.tx_id for t in transmitters]
    if len(set(tx_ids)) != len(tx_ids):
        raise ConfigError("scenario.transmitters", "duplicate transmitter ids")
    known = set(node_ids)
    for i, tx in enumerate(transmitters):
        for target in tx.targets or []:
            if target not in known:
                raise ConfigError(f"transmitters[{i}].targets",
                                  f"unknown node {target!r}")
        for node_id in tx.distances:
            if node_id not in known:
                raise ConfigError(f"transmitters[{i}].distances",
                                  f"unknown node {node_id!r}")
    for i, st in enumerate(stimuli):
        if st.node_id not in known:
            raise ConfigError(f"stimuli[{i}].node", f"unknown node {st.node_id!r}")
    spatial_nodes = [n for n in nodes if n.policy.kind == "spatial"]
    if spatial_nodes:
        if len(spatial_nodes) != len(nodes):
            raise ConfigError("scenario.policy",
                              "spatial assignment requires every node to use it")
        if not transmitters:
            raise ConfigError("scenario.transmitters",
                              "spatial assignment needs at least one transmitter")

    return Scenario(
        name=name,
        duration=duration,
        seed=seed,
        transmitters=transmitters,
        nodes=nodes,
        stimuli=stimuli,
        scenario_hash=scenario_hash(cfg),
    )


def validate_scenario(cfg) -> list[str]:
    """Collect config problems as "path: message" strings (empty = valid)."""
    if not isinstance(cfg, dict):
        return ["scenario: expected a JSON object"]
    issues = []

    def attempt(fn, *args):
        try:
            fn(*args)
            return True
        except ConfigError as e:
            issues.append(str(e))
            return False

    attempt(_check_keys, cfg, _TOP_KEYS, "scenario")
    ok_sections = True
    tx_list = cfg.get("transmitters", [])
    if isinstance(tx_list, list):
        for i, t in enumerate(tx_list):
            ok_sections &= attempt(_build_transmitter, t, i)
    else:
        issues.append("scenario.transmitters: expected a list")
        ok_sections = False
    default_policy = PolicyDef(kind="protocol")
    if "policy" in cfg:
        try:
            default_policy = _build_policy(cfg["policy"], "scenario.policy")
        except ConfigError as e:
            issues.append(str(e))
            ok_sections = False
    node_list = cfg.get("nodes", [])
    if isinstance(node_list, list):
        for i, n in enumerate(node_list):
            ok_sections &= attempt(_build_node, n, i, default_policy)
    else:
        issues.append("scenario.nodes: expected a list")
        ok_sections = False
    stim_list = cfg.get("stimuli", [])
    if isinstance(stim_list, list):
        for i, s in enumerate(stim_list):
            ok_sections &= attempt(_build_stimulus, s, i)
    else:
        issues.append("scenario.stimuli: expected a list")
        ok_sections = False
    if ok_sections:
        # sections are individually fine; surface cross-reference problems
        attempt(build_scenario, cfg)
    return issues


def load_scenario(path) -> Scenario:
    """Read a scenario JSON file and build the runtime Scenario."""
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as e:
        raise ConfigError(str(path), f"cannot read scenario file: {e}") from None
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(str(path), f"invalid JSON: {e}") from None
    if not isinstance(cfg, dict):
        raise ConfigError(str(path), "scenario must be a JSON object")
    return build_scenario(cfg, default_name=p.stem)
