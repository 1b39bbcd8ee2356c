"""Self-powered sensor node: protocol state machine, command codec, loads.

The node sleeps until light hits its solar panel.  It then checks the
store's terminal voltage against a threshold (default 3.6 V): below the
threshold it takes sensor measurements, saves them, and goes back to
sleep; at or above it, the panel switches to receiver mode to accept
commands (sensor on/off, send/retransmit saved data), then returns to
harvesting until the store is full, and finally sleeps.

Command frames are 4 bytes on the wire:

    SYNC(0xAA) | OPCODE | PAYLOAD | CRC8(opcode, payload)

with CRC-8 polynomial 0x07, init 0x00, MSB first.  Payload is a sensor
id for SensorOn/SensorOff and a free byte (conventionally 0) otherwise.
"""

import enum
from dataclasses import dataclass, field

from sliptsim.errors import ConfigError, DomainError, FrameError
from sliptsim.harvester import CellMode

SYNC_BYTE = 0xAA
CRC8_POLY = 0x07


class Phase(enum.Enum):
    SLEEP = "sleep"
    WAKE_CHECK = "wake_check"
    SENSE_SAVE = "sense_save"
    COMMAND_RX = "command_rx"
    HARVEST = "harvest"


class Stimulus(enum.Enum):
    LIGHT_DETECTED = "light_detected"
    SENSE_COMPLETE = "sense_complete"
    COMMANDS_COMPLETE = "commands_complete"
    FULL_CHARGE = "full_charge"
    TIMEOUT = "timeout"


class Opcode(enum.Enum):
    SENSOR_ON = 0x01
    SENSOR_OFF = 0x02
    SEND_DATA = 0x03
    RETRANSMIT = 0x04


@dataclass(frozen=True)
class Command:
    """One node command; sensor_id doubles as the raw payload byte."""

    opcode: Opcode
    sensor_id: int = 0

    def __post_init__(self):
        if not 0 <= self.sensor_id <= 0xFF:
            raise DomainError("sensor_id must fit in one byte")


@dataclass(frozen=True)
class SensorRecord:
    timestamp: float  # s
    sensor_id: int
    value: float  # physical units of the sensor (degC, NTU, ...)


@dataclass(frozen=True)
class LoadProfile:
    """One row of the current-consumption catalog."""

    name: str
    supply_voltage: float  # V
    current: float  # A
    throughput: float | None = None  # bit/s, None if the feature carries no data

    @property
    def power(self) -> float:
        return self.supply_voltage * self.current


# Current consumption of a fully awake device by enabled feature set.
# "sleep" (zero draw, wake-up circuit assumed negligible) and
# "laser_uplink" (device-default low-power laser driver) are additions
# for simulation bookkeeping; the others are measured catalog rows.
LOAD_CATALOG: dict[str, LoadProfile] = {
    p.name: p
    for p in [
        LoadProfile("wifi_bluetooth", 3.7, 102e-3, 500e3),
        LoadProfile("iot_clock_10mhz", 3.7, 36e-3, 500e3),
        LoadProfile("soc_mcu_3mhz", 3.7, 11e-3, 115.2e3),
        LoadProfile("video_streaming", 5.0, 110e-3, None),
        LoadProfile("sense_and_save", 3.7, 7e-3, None),
        LoadProfile("video_wifi_bt", 5.0, 236e-3, 500e3),
        LoadProfile("laser_uplink", 3.7, 40e-3, 500e3),
        LoadProfile("sleep", 0.0, 0.0, None),
    ]
}


def load_power(profile_name: str) -> float:
    """Electrical draw [W] of a catalog row; ConfigError if unknown."""
    profile = LOAD_CATALOG.get(profile_name)
    if profile is None:
        raise ConfigError(
            f"load:{profile_name}",
            f"unknown load profile (have: {', '.join(sorted(LOAD_CATALOG))})",
        )
    return profile.power


# -- Command codec -----------------------------------------------------------


def crc8(data: bytes | list[int]) -> int:
    """CRC-8, polynomial 0x07, init 0x00, MSB first, no final XOR."""
    crc = 0
    for byte in data:
        crc ^= byte
        for _ in range(8):
            if crc & 0x80:
                crc = ((crc << 1) ^ CRC8_POLY) & 0xFF
            else:
                crc = (crc << 1) & 0xFF
    return crc


def encode_command(cmd: Command) -> bytes:
    """Serialize a command into its 4-byte frame."""
    body = bytes([cmd.opcode.value, cmd.sensor_id])
    return bytes([SYNC_BYTE]) + body + bytes([crc8(body)])


def decode_command(frame: bytes) -> Command:
    """Parse a 4-byte frame back into a Command.

    Raises FrameError on wrong length, bad sync byte, CRC mismatch, or
    an unknown opcode.
    """
    if len(frame) != 4:
        raise FrameError(f"frame must be 4 bytes, got {len(frame)}")
    if frame[0] != SYNC_BYTE:
        raise FrameError(f"bad sync byte 0x{frame[0]:02X}")
    body = frame[1:3]
    if crc8(body) != frame[3]:
        raise FrameError(
            f"CRC mismatch: received 0x{frame[3]:02X}, computed 0x{crc8(body):02X}"
        )
    try:
        opcode = Opcode(frame[1])
    except ValueError:
        raise FrameError(f"unknown opcode 0x{frame[1]:02X}") from None
    return Command(opcode, frame[2])


# -- Protocol state machine --------------------------------------------------


@dataclass(frozen=True)
class Action:
    """Side effect requested by a state transition, executed by the engine.

    kinds:
        switch_cell_mode  arg: CellMode target
        start_sensing     arg: tuple of enabled sensor ids
        start_command_rx  arg: None (begin accepting command frames)
        protocol_error    arg: human-readable description
    """

    kind: str
    arg: object = None


@dataclass
class NodeState:
    """Protocol state of one node.

    storage is append-only during a run; records leave only through an
    acknowledged data transmission.  active_load names the catalog row
    that drains the store in every awake phase other than Harvest
    (WakeCheck, SenseSave, CommandRx); Sleep and Harvest draw
    sleep_load (default "sleep", i.e. zero).
    """

    phase: Phase = Phase.SLEEP
    v_threshold: float = 3.6
    pending_commands: list[Command] = field(default_factory=list)
    storage: list[SensorRecord] = field(default_factory=list)
    enabled_sensors: set[int] = field(default_factory=set)
    active_load: str = "sense_and_save"
    sleep_load: str = "sleep"
    last_sent: list[SensorRecord] = field(default_factory=list)

    def step(self, stimulus: Stimulus, v_b: float | None = None) -> list[Action]:
        """Deterministic transition on one stimulus; returns actions.

        v_b is the store terminal voltage observed with the stimulus
        (meaningful for LightDetected).  A stimulus with no transition
        defined for the current phase leaves the phase unchanged and
        yields a single protocol_error action for the trace.
        """
        phase = self.phase
        if stimulus is Stimulus.LIGHT_DETECTED:
            if phase is Phase.SLEEP:
                self.phase = Phase.WAKE_CHECK
                return []
            if phase is Phase.WAKE_CHECK:
                if v_b is None:
                    raise DomainError("LightDetected in WakeCheck requires v_b")
                if v_b >= self.v_threshold:
                    self.phase = Phase.COMMAND_RX
                    return [
                        Action("switch_cell_mode", CellMode.PHOTOCONDUCTIVE),
                        Action("start_command_rx"),
                    ]
                self.phase = Phase.SENSE_SAVE
                return [Action("start_sensing", tuple(sorted(self.enabled_sensors)))]
        elif stimulus is Stimulus.SENSE_COMPLETE and phase is Phase.SENSE_SAVE:
            self.phase = Phase.SLEEP
            return []
        elif stimulus is Stimulus.COMMANDS_COMPLETE and phase is Phase.COMMAND_RX:
            self.phase = Phase.HARVEST
            return [Action("switch_cell_mode", CellMode.PHOTOVOLTAIC)]
        elif stimulus is Stimulus.FULL_CHARGE and phase is Phase.HARVEST:
            self.phase = Phase.SLEEP
            return []
        return [
            Action(
                "protocol_error",
                f"stimulus {stimulus.value} invalid in phase {phase.value}",
            )
        ]

    def record_sensor(self, sensor_id: int, value: float, timestamp: float) -> bool:
        """Append one measurement; returns False (no-op) for a disabled sensor."""
        if sensor_id not in self.enabled_sensors:
            return False
        if self.storage and timestamp < self.storage[-1].timestamp:
            raise DomainError("record timestamps must be non-decreasing")
        self.storage.append(SensorRecord(timestamp, sensor_id, value))
        return True

    def execute_command(self, cmd: Command) -> list[SensorRecord]:
        """Apply a decoded command; returns records to transmit, if any.

        SendData hands over the full storage (cleared after the engine
        acknowledges the transmission via ack_transmission); Retransmit
        hands over the last transmitted batch again.
        """
        if cmd.opcode is Opcode.SENSOR_ON:
            self.enabled_sensors.add(cmd.sensor_id)
            return []
        if cmd.opcode is Opcode.SENSOR_OFF:
            self.enabled_sensors.discard(cmd.sensor_id)
            return []
        if cmd.opcode is Opcode.SEND_DATA:
            return list(self.storage)
        return list(self.last_sent)  # RETRANSMIT

    def ack_transmission(self, batch: list[SensorRecord]) -> None:
        """Acknowledge a delivered batch: clear it from storage."""
        self.last_sent = list(batch)
        delivered = set(id(r) for r in batch)
        self.storage = [r for r in self.storage if id(r) not in delivered]


def records_csv(records: list[SensorRecord]) -> str:
    """Render records as CSV with a timestamp,sensor_id,value header."""
    lines = ["timestamp,sensor_id,value"]
    for r in records:
        lines.append(f"{r.timestamp!r},{r.sensor_id},{r.value!r}")
    return "\n".join(lines) + "\n"
