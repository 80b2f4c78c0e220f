"""Displacement-to-sound parameter mapping.

Six directions map onto five sound characteristics of a Shepard tone:
left/right drives signed chroma rotation, above drives the loudness
fluctuation rate, below drives the roughness (modulation index of a fixed
80 Hz frequency modulator), behind shifts the spectral envelope up
(brightness), in front narrows it (fullness). Each parameter depends only
on its own displacement axis; pink noise gates on within the proximity
radius.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .scene import Displacement, Vec3

__all__ = [
    "Displacement",
    "SoniParams",
    "MappingConfig",
    "CrossingEvents",
    "map_displacement",
    "detect_crossings",
    "MappingError",
]


class MappingError(ValueError):
    """Invalid mapping configuration or parameter frame."""


@dataclass(frozen=True)
class SoniParams:
    """One complete sound-parameter frame.

    chroma_rate is signed (octaves/second, positive = upward/clockwise);
    am_freq and fm_index are the mutually exclusive up/down cues;
    brightness_shift (octaves) and fullness (bandwidth factor, 1 = full)
    are the mutually exclusive back/front cues.
    """

    chroma_rate: float = 0.0
    am_freq: float = 0.0
    fm_index: float = 0.0
    brightness_shift: float = 0.0
    fullness: float = 1.0
    proximity_noise: bool = False

    def __post_init__(self):
        vals = (self.chroma_rate, self.am_freq, self.fm_index,
                self.brightness_shift, self.fullness)
        if not all(math.isfinite(v) for v in vals):
            raise MappingError(f"non-finite parameter in {self}")
        if self.am_freq < 0.0 or self.fm_index < 0.0 or self.brightness_shift < 0.0:
            raise MappingError("am_freq, fm_index, brightness_shift must be >= 0")
        if not 0.0 < self.fullness <= 1.0:
            raise MappingError(f"fullness {self.fullness} outside (0, 1]")
        if self.am_freq > 0.0 and self.fm_index > 0.0:
            raise MappingError("up and down cues are mutually exclusive")
        if self.brightness_shift > 0.0 and self.fullness < 1.0:
            raise MappingError("back and front cues are mutually exclusive")

    def to_dict(self) -> dict:
        return {
            "chroma_rate": self.chroma_rate,
            "am_freq": self.am_freq,
            "fm_index": self.fm_index,
            "brightness_shift": self.brightness_shift,
            "fullness": self.fullness,
            "proximity_noise": self.proximity_noise,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SoniParams":
        return cls(
            chroma_rate=float(d["chroma_rate"]),
            am_freq=float(d["am_freq"]),
            fm_index=float(d["fm_index"]),
            brightness_shift=float(d["brightness_shift"]),
            fullness=float(d["fullness"]),
            proximity_noise=bool(d["proximity_noise"]),
        )


NEUTRAL = SoniParams()


@dataclass(frozen=True)
class MappingConfig:
    """Transfer-function constants; distances in cm, rates in their units.

    Each axis uses a linear law with a small deadzone and saturation:
    the cue stays at zero inside the deadzone, grows linearly with the
    axis distance, and holds its maximum beyond the saturation distance.
    """

    omega_max: float = 1.0          # oct/s at x saturation
    x_sat: float = 10.0
    am_freq_min: float = 0.5        # Hz, just outside the y deadzone
    am_freq_max: float = 8.0        # Hz at y saturation
    y_sat: float = 10.0
    beta_max: float = 6.0           # modulation index at y saturation
    mod_freq: float = 80.0          # Hz, fixed roughness modulator
    shift_max: float = 2.0          # octaves at z saturation
    z_sat: float = 10.0
    fullness_min: float = 0.25      # bandwidth factor at z saturation
    prox_radius: float = 3.0        # cm, pink-noise gate
    deadzone: tuple[float, float, float] = (0.05, 0.05, 0.05)

    def __post_init__(self):
        if min(self.x_sat, self.y_sat, self.z_sat) <= 0.0:
            raise MappingError("saturation distances must be positive")
        if not self.am_freq_min < self.am_freq_max:
            raise MappingError("need am_freq_min < am_freq_max")
        if self.prox_radius <= 0.0:
            raise MappingError("prox_radius must be positive")
        if not 0.0 < self.fullness_min <= 1.0:
            raise MappingError(f"fullness_min {self.fullness_min} outside (0, 1]")
        if len(self.deadzone) != 3 or any(d < 0.0 for d in self.deadzone):
            raise MappingError(f"bad deadzone {self.deadzone}")
        if any(self.deadzone[i] >= s for i, s in enumerate((self.x_sat, self.y_sat, self.z_sat))):
            raise MappingError("deadzone must stay below saturation")

    def to_dict(self) -> dict:
        return {
            "omega_max": self.omega_max,
            "x_sat": self.x_sat,
            "am_freq_min": self.am_freq_min,
            "am_freq_max": self.am_freq_max,
            "y_sat": self.y_sat,
            "beta_max": self.beta_max,
            "mod_freq": self.mod_freq,
            "shift_max": self.shift_max,
            "z_sat": self.z_sat,
            "fullness_min": self.fullness_min,
            "prox_radius": self.prox_radius,
            "deadzone": list(self.deadzone),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MappingConfig":
        kwargs = dict(d)
        if "deadzone" in kwargs:
            kwargs["deadzone"] = tuple(float(v) for v in kwargs["deadzone"])
        return cls(**kwargs)


def _saturate(dist: float, sat: float) -> float:
    return min(dist / sat, 1.0)


def map_displacement(d: Displacement, cfg: MappingConfig) -> SoniParams:
    """Encode a displacement as a sound-parameter frame.

    Pure and per-axis: perturbing one displacement axis changes only that
    axis's parameters (plus the norm-based proximity gate).
    """
    dzx, dzy, dzz = cfg.deadzone

    chroma = 0.0
    if abs(d.dx) > dzx:
        chroma = math.copysign(cfg.omega_max * _saturate(abs(d.dx), cfg.x_sat), d.dx)

    am = 0.0
    beta = 0.0
    if d.dy > dzy:
        frac = min((d.dy - dzy) / (cfg.y_sat - dzy), 1.0)
        am = cfg.am_freq_min + (cfg.am_freq_max - cfg.am_freq_min) * frac
    elif d.dy < -dzy:
        beta = cfg.beta_max * _saturate(-d.dy, cfg.y_sat)

    shift = 0.0
    fullness = 1.0
    if d.dz > dzz:
        shift = cfg.shift_max * _saturate(d.dz, cfg.z_sat)
    elif d.dz < -dzz:
        fullness = 1.0 - (1.0 - cfg.fullness_min) * _saturate(-d.dz, cfg.z_sat)

    return SoniParams(
        chroma_rate=chroma,
        am_freq=am,
        fm_index=beta,
        brightness_shift=shift,
        fullness=fullness,
        proximity_noise=d.norm() < cfg.prox_radius,
    )


@dataclass(frozen=True)
class CrossingEvents:
    height_crossed: bool
    depth_crossed: bool


def _crossed(prev: float, cur: float, ref: float) -> bool:
    # strict sign change, or landing exactly on the plane; resting there
    # or leaving it does not re-trigger
    a, b = prev - ref, cur - ref
    if b == 0.0:
        return a != 0.0
    return (a < 0.0 < b) or (b < 0.0 < a)


def detect_crossings(prev: Vec3, cur: Vec3, target: Vec3) -> CrossingEvents:
    """Did the probe surpass the target's height (y) or depth (z) plane?"""
    return CrossingEvents(
        height_crossed=_crossed(prev.y, cur.y, target.y),
        depth_crossed=_crossed(prev.z, cur.z, target.z),
    )
