"""Underwater optical channel: attenuation, beam divergence, turbulence.

Received power is modeled as a product of three factors applied to the
transmit power:

    P_R = P_t * capture(geometry) * exp(-alpha * z) * fade

where alpha [1/m] is the total attenuation coefficient (absorption plus
scattering), capture is the fraction of the diverged beam disc falling
on the receiver aperture, and fade is a unit-mean log-normal turbulence
coefficient (exactly 1 when the scintillation index is zero).

All functions are pure; callers own the random stream passed to
sample_fading, so concurrent evaluation is safe as long as each worker
uses its own stream.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from sliptsim.errors import DomainError, GeometryError

# Literature-typical attenuation presets, per meter at blue-green
# wavelengths.  These are conventional textbook values for water types,
# not measurements tied to any specific experiment.
WATER_PRESETS: dict[str, tuple[float, float]] = {
    # name: (absorption 1/m, scattering 1/m)
    "pure_sea": (0.053, 0.003),
    "clear_ocean": (0.114, 0.037),
    "coastal": (0.179, 0.220),
    "turbid_harbor": (0.295, 1.875),
}


@dataclass(frozen=True)
class WaterProperties:
    """Absorption/scattering coefficients of a water column, per meter."""

    absorption_coeff: float
    scattering_coeff: float
    total_attenuation: float = field(init=False)

    def __post_init__(self):
        if self.absorption_coeff < 0 or self.scattering_coeff < 0:
            raise DomainError("absorption and scattering coefficients must be >= 0")
        object.__setattr__(
            self, "total_attenuation", self.absorption_coeff + self.scattering_coeff
        )

    @classmethod
    def preset(cls, name: str) -> "WaterProperties":
        try:
            absorption, scattering = WATER_PRESETS[name]
        except KeyError:
            raise DomainError(
                f"unknown water preset {name!r} (have: {', '.join(sorted(WATER_PRESETS))})"
            ) from None
        return cls(absorption, scattering)


@dataclass(frozen=True)
class BeamGeometry:
    """Beam and receiver geometry for one line-of-sight link.

    initial_radius: beam radius at the transmitter exit [m]
    half_angle_divergence: half-angle of the cone the beam spreads into [rad]
    receiver_aperture_radius: radius of the collecting area [m]
    distance: propagation length through the water [m]
    """

    initial_radius: float
    half_angle_divergence: float
    receiver_aperture_radius: float
    distance: float

    def __post_init__(self):
        for name in (
            "initial_radius",
            "half_angle_divergence",
            "receiver_aperture_radius",
            "distance",
        ):
            if getattr(self, name) < 0:
                raise DomainError(f"{name} must be >= 0")

    def radius_at_receiver(self) -> float:
        """Beam radius after diverging over the link distance [m]."""
        return self.initial_radius + self.distance * math.tan(self.half_angle_divergence)


@dataclass(frozen=True)
class TurbulenceModel:
    """Unit-mean log-normal fading parameterized by the scintillation index.

    scintillation_index is the normalized variance of received-intensity
    fluctuations (sigma^2).  Zero means a calm channel: the fading
    coefficient is the constant 1.  rng_stream_id names the deterministic
    random stream the engine derives for this link from the master seed.
    """

    scintillation_index: float = 0.0
    rng_stream_id: str = ""

    def __post_init__(self):
        if self.scintillation_index < 0:
            raise DomainError("scintillation_index must be >= 0")


@dataclass(frozen=True)
class LinkParams:
    """Everything needed to evaluate one optical path."""

    tx_power: float
    wavelength: float  # nm, selects the water entry; not used numerically
    water: WaterProperties
    geometry: BeamGeometry
    turbulence: TurbulenceModel = TurbulenceModel()

    def __post_init__(self):
        if self.tx_power < 0:
            raise DomainError("tx_power must be >= 0")


def attenuate(intensity_in: float, alpha: float, distance: float) -> float:
    """Exponential decay of intensity over a propagation distance.

    Returns intensity_in * exp(-alpha * distance).  Monotone
    non-increasing in both alpha and distance.
    """
    if intensity_in < 0:
        raise DomainError("intensity_in must be >= 0")
    if alpha < 0:
        raise DomainError("alpha must be >= 0")
    if distance < 0:
        raise DomainError("distance must be >= 0")
    return intensity_in * math.exp(-alpha * distance)


def geometric_capture(geometry: BeamGeometry) -> float:
    """Fraction of beam power collected by the receiver aperture.

    The beam is modeled as a uniform (top-hat) disc of radius
    w(z) = w0 + z*tan(theta); the captured fraction is the aperture/beam
    area ratio, clipped at 1 when the aperture covers the whole disc.
    """
    w = geometry.radius_at_receiver()
    if w == 0.0:
        raise GeometryError("zero-width beam: initial radius and divergence are both zero")
    ratio = geometry.receiver_aperture_radius / w
    return min(1.0, ratio * ratio)


def sample_fading(model: TurbulenceModel, rng: np.random.Generator) -> float:
    """Draw one turbulence fading coefficient from the model.

    Samples are log-normal with unit mean and log-variance
    ln(1 + sigma^2), so the sample variance equals the scintillation
    index.  sigma^2 = 0 returns exactly 1.0 without consuming randomness.
    """
    sigma2 = model.scintillation_index
    if sigma2 < 0:
        raise DomainError("scintillation_index must be >= 0")
    if sigma2 == 0.0:
        return 1.0
    log_var = math.log1p(sigma2)
    return float(rng.lognormal(mean=-log_var / 2.0, sigma=math.sqrt(log_var)))


def received_power(link: LinkParams, rng: np.random.Generator) -> float:
    """Optical power arriving at the receiver for one channel realization.

    Composes geometric capture, exponential attenuation, and one fading
    sample.  With zero turbulence, zero divergence, zero attenuation and
    an oversized aperture this returns exactly the transmit power.
    """
    capture = geometric_capture(link.geometry)
    fade = sample_fading(link.turbulence, rng)
    attenuated = attenuate(link.tx_power, link.water.total_attenuation, link.geometry.distance)
    return attenuated * capture * fade
