"""Solar-cell receiver with exclusive harvesting and decoding modes.

The cell is either photovoltaic (sourcing power into an energy store) or
photoconductive (reverse-biased, acting as a photodetector).  A relay
performs the switch; while it settles, the cell does neither.  Decoding
uses a hard sensitivity threshold: at or above it the configured link
rate is delivered error-free, below it the slot is an outage.
"""

import enum
from dataclasses import dataclass, field

from sliptsim.errors import DomainError, ModeError

# 55 mm x 70 mm cell
DEFAULT_AREA_M2 = 55e-3 * 70e-3


class CellMode(enum.Enum):
    PHOTOVOLTAIC = "photovoltaic"
    PHOTOCONDUCTIVE = "photoconductive"


@dataclass
class SolarCell:
    """One solar cell and its receive-chain parameters.

    area: active area [m^2]
    conversion_efficiency: optical-to-electrical efficiency in PV mode,
        taken as the max-power-point value (0, 1]
    decode_bandwidth: 3-dB bandwidth in photovoltaic mode [Hz]; carried
        as a datasheet parameter, independent of decode_rate
    decode_rate: configured link rate in photoconductive mode [bit/s]
    sensitivity: minimum optical power for error-free decoding [W]
    switch_latency: relay settling time on a mode change [s]
    """

    area: float = DEFAULT_AREA_M2
    conversion_efficiency: float = 0.2
    decode_bandwidth: float = 30e3
    decode_rate: float = 500e3
    sensitivity: float = 1e-6
    mode: CellMode = CellMode.PHOTOVOLTAIC
    switch_latency: float = 5e-3
    ready_at: float = field(default=0.0, repr=False)

    def __post_init__(self):
        if not 0.0 < self.conversion_efficiency <= 1.0:
            raise DomainError("conversion_efficiency must be in (0, 1]")
        if self.area <= 0:
            raise DomainError("area must be > 0")
        if self.switch_latency < 0:
            raise DomainError("switch_latency must be >= 0")
        if self.decode_rate < 0 or self.decode_bandwidth < 0 or self.sensitivity < 0:
            raise DomainError("decode_rate, decode_bandwidth and sensitivity must be >= 0")

    def harvest_power(self, incident: float) -> float:
        """Electrical power sourced from `incident` optical watts (PV mode)."""
        if self.mode is not CellMode.PHOTOVOLTAIC:
            raise ModeError("harvest_power requires photovoltaic mode")
        if incident < 0:
            raise DomainError("incident power must be >= 0")
        return self.conversion_efficiency * incident

    def decode_throughput(self, incident: float, duration: float) -> float:
        """Bits delivered over `duration` seconds of decoding (PC mode).

        Full rate when incident >= sensitivity, zero (outage) otherwise.
        """
        if self.mode is not CellMode.PHOTOCONDUCTIVE:
            raise ModeError("decode_throughput requires photoconductive mode")
        if duration < 0:
            raise DomainError("duration must be >= 0")
        if incident < self.sensitivity:
            return 0.0
        return self.decode_rate * duration

    def switch_mode(self, target: CellMode, now: float) -> float:
        """Switch the relay toward `target`; returns when the cell is usable.

        A no-op (same mode) returns `now`.  Otherwise the cell is
        unusable during [now, now + switch_latency).
        """
        if target is self.mode:
            return now
        self.mode = target
        self.ready_at = now + self.switch_latency
        return self.ready_at
