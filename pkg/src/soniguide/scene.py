"""Workspace geometry: probe/target coordinate frame, skull-proxy surface,
target rings, and the trial/session records shared by every other module.

Coordinate convention (right-handed, lengths in cm):
    x : left/right, positive to the right
    y : up/down (height), positive up
    z : front/back, positive toward the back
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

SURFACE_TOL = 1e-6       # cm, target-on-surface acceptance
ANGLE_TOL = 1e-9         # rad, ring spacing acceptance


class SceneError(ValueError):
    """Invalid geometry or session data."""


class InvalidRingError(SceneError):
    """A ring spec cannot be projected onto the upper proxy surface."""

    def __init__(self, ring_index: int, reason: str):
        self.ring_index = ring_index
        super().__init__(f"ring {ring_index}: {reason}")


@dataclass(frozen=True)
class Vec3:
    x: float
    y: float
    z: float

    def __post_init__(self):
        for name in ("x", "y", "z"):
            c = float(getattr(self, name))
            if not math.isfinite(c):
                raise SceneError(f"non-finite component in {(self.x, self.y, self.z)}")
            object.__setattr__(self, name, c)

    def __add__(self, o: "Vec3") -> "Vec3":
        return Vec3(self.x + o.x, self.y + o.y, self.z + o.z)

    def __sub__(self, o: "Vec3") -> "Vec3":
        return Vec3(self.x - o.x, self.y - o.y, self.z - o.z)

    def scaled(self, s: float) -> "Vec3":
        return Vec3(self.x * s, self.y * s, self.z * s)

    def dot(self, o: "Vec3") -> float:
        return self.x * o.x + self.y * o.y + self.z * o.z

    def cross(self, o: "Vec3") -> "Vec3":
        return Vec3(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )

    def norm(self) -> float:
        return math.sqrt(self.dot(self))

    def normalized(self) -> "Vec3":
        n = self.norm()
        if n == 0.0:
            raise SceneError("cannot normalize zero vector")
        return self.scaled(1.0 / n)

    def to_list(self) -> list[float]:
        return [self.x, self.y, self.z]

    @classmethod
    def from_seq(cls, seq: Sequence[float]) -> "Vec3":
        if len(seq) != 3:
            raise SceneError(f"expected 3 components, got {len(seq)}")
        return cls(float(seq[0]), float(seq[1]), float(seq[2]))


@dataclass(frozen=True)
class Displacement:
    """Probe-to-target offset in cm (target minus probe, component-wise)."""

    dx: float
    dy: float
    dz: float

    def __post_init__(self):
        for c in (self.dx, self.dy, self.dz):
            if not math.isfinite(c):
                raise SceneError(f"non-finite displacement {(self.dx, self.dy, self.dz)}")

    def norm(self) -> float:
        return math.sqrt(self.dx * self.dx + self.dy * self.dy + self.dz * self.dz)


def displacement(probe: Vec3, target: Vec3) -> Displacement:
    """Offset from probe to target; the quantity the sonification encodes."""
    return Displacement(target.x - probe.x, target.y - probe.y, target.z - probe.z)


class GuidanceMode(str, Enum):
    A = "a"     # auditory only, screen blank
    V = "v"     # visual only, sound muted
    AV = "av"   # both

    @classmethod
    def parse(cls, value: str) -> "GuidanceMode":
        try:
            return cls(value.lower())
        except ValueError:
            raise SceneError(f"unknown guidance mode {value!r}") from None


@dataclass(frozen=True)
class GroupOrder:
    """Per-decade guidance mode schedule; each mode appears exactly once."""

    modes: tuple[GuidanceMode, GuidanceMode, GuidanceMode]

    def __post_init__(self):
        if sorted(m.value for m in self.modes) != ["a", "av", "v"]:
            raise SceneError(f"order must use each mode once, got {self.modes}")

    @property
    def name(self) -> str:
        return "-".join(m.value for m in self.modes)

    @classmethod
    def parse(cls, name: str) -> "GroupOrder":
        parts = name.split("-")
        if len(parts) != 3:
            raise SceneError(f"bad group order {name!r}")
        return cls(tuple(GuidanceMode.parse(p) for p in parts))

    @classmethod
    def all_orders(cls) -> list["GroupOrder"]:
        names = ["a-v-av", "a-av-v", "av-a-v", "av-v-a", "v-a-av", "v-av-a"]
        return [cls.parse(n) for n in names]


@dataclass(frozen=True)
class SkullProxy:
    """Upper half-ellipsoid approximating the top of a skull."""

    center: Vec3
    semi_axes: Vec3

    def __post_init__(self):
        if min(self.semi_axes.x, self.semi_axes.y, self.semi_axes.z) <= 0.0:
            raise SceneError(f"semi-axes must be positive, got {self.semi_axes}")

    def implicit(self, p: Vec3) -> float:
        """Ellipsoid equation value; 1.0 on the surface."""
        r = p - self.center
        return (
            (r.x / self.semi_axes.x) ** 2
            + (r.y / self.semi_axes.y) ** 2
            + (r.z / self.semi_axes.z) ** 2
        )

    def on_surface(self, p: Vec3, tol: float = 1e-9) -> bool:
        return abs(self.implicit(p) - 1.0) <= tol

    def project(self, p: Vec3) -> Vec3:
        """Radial projection of p (relative to center) onto the surface."""
        r = p - self.center
        q = self.implicit(p)
        if q == 0.0:
            raise SceneError("cannot project the center point")
        return self.center + r.scaled(1.0 / math.sqrt(q))


@dataclass(frozen=True)
class RingSpec:
    direction: Vec3     # unit vector from proxy center, y >= 0
    radius: float       # cm


@dataclass(frozen=True)
class Ring:
    direction: Vec3
    radius: float
    targets: tuple[Vec3, ...]


@dataclass(frozen=True)
class TargetLayout:
    proxy: SkullProxy
    rings: tuple[Ring, ...]

    def __post_init__(self):
        if len(self.rings) != 6 or any(len(r.targets) != 5 for r in self.rings):
            raise SceneError("layout must hold 6 rings of 5 targets")
        for ring in self.rings:
            for t in ring.targets:
                if abs(self.proxy.implicit(t) - 1.0) > SURFACE_TOL:
                    raise SceneError(f"target {t} is off the proxy surface")

    @property
    def targets(self) -> list[Vec3]:
        """All 30 targets, ring-major order."""
        return [t for ring in self.rings for t in ring.targets]

    def to_dict(self) -> dict:
        return {
            "proxy": {
                "center": self.proxy.center.to_list(),
                "semi_axes": self.proxy.semi_axes.to_list(),
            },
            "rings": [
                {
                    "direction": r.direction.to_list(),
                    "radius": r.radius,
                    "targets": [t.to_list() for t in r.targets],
                }
                for r in self.rings
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TargetLayout":
        proxy = SkullProxy(
            Vec3.from_seq(d["proxy"]["center"]),
            Vec3.from_seq(d["proxy"]["semi_axes"]),
        )
        rings = tuple(
            Ring(
                Vec3.from_seq(r["direction"]),
                float(r["radius"]),
                tuple(Vec3.from_seq(t) for t in r["targets"]),
            )
            for r in d["rings"]
        )
        return cls(proxy, rings)


def _ring_basis(d: Vec3) -> tuple[Vec3, Vec3]:
    """Deterministic orthonormal pair spanning the plane normal to d."""
    ref = Vec3(1.0, 0.0, 0.0) if abs(d.y) > 0.9 else Vec3(0.0, 1.0, 0.0)
    u = d.cross(ref).normalized()
    v = d.cross(u)
    return u, v


def generate_layout(proxy: SkullProxy, ring_specs: Sequence[RingSpec]) -> TargetLayout:
    """Place six rings of five targets on the upper proxy surface.

    Each ring's ideal points sit on a circle of the given radius in the
    tangent plane at the surface point along `direction`; targets are the
    radial projections of those points back onto the ellipsoid, which keeps
    the five azimuths about the ring axis exactly equally spaced.
    """
    if len(ring_specs) != 6:
        raise SceneError(f"expected 6 ring specs, got {len(ring_specs)}")
    rings = []
    for i, spec in enumerate(ring_specs):
        if spec.radius <= 0.0:
            raise InvalidRingError(i, f"radius must be positive, got {spec.radius}")
        if abs(spec.direction.norm() - 1.0) > 1e-9:
            raise InvalidRingError(i, "direction must be a unit vector")
        if spec.direction.y < 0.0:
            raise InvalidRingError(i, "direction points below the equator")
        apex = proxy.project(proxy.center + spec.direction)
        u, v = _ring_basis(spec.direction)
        targets = []
        for j in range(5):
            theta = 2.0 * math.pi * j / 5.0
            ideal = apex + u.scaled(spec.radius * math.cos(theta)) + v.scaled(
                spec.radius * math.sin(theta)
            )
            t = proxy.project(ideal)
            if t.y < proxy.center.y - 1e-9:
                raise InvalidRingError(i, f"point {j} projects below the equator")
            targets.append(t)
        rings.append(Ring(spec.direction, spec.radius, tuple(targets)))
    return TargetLayout(proxy, tuple(rings))


def target_path(layout: TargetLayout, seed: int) -> list[int]:
    """Seeded pseudo-random visiting order over the 30 targets.

    The shuffle is deterministic for a fixed seed, so one pinned seed gives
    every recorded session the same path.
    """
    n = len(layout.targets)
    if n != 30:
        raise SceneError(f"layout must carry 30 targets, found {n}")
    order = list(range(n))
    random.Random(seed).shuffle(order)
    return order


@dataclass(frozen=True)
class ProbeSample:
    t: float      # seconds since trial start
    pos: Vec3

    def __post_init__(self):
        object.__setattr__(self, "t", float(self.t))
        if not math.isfinite(self.t) or self.t < 0.0:
            raise SceneError(f"bad sample time {self.t}")


@dataclass(frozen=True)
class Trial:
    index: int                          # 1..30, path order
    target: Vec3
    mode: GuidanceMode
    samples: tuple[ProbeSample, ...]
    click_pos: Vec3
    click_t: float

    def __post_init__(self):
        object.__setattr__(self, "click_t", float(self.click_t))
        if not 1 <= self.index <= 30:
            raise SceneError(f"trial index {self.index} out of range")
        if not self.samples:
            raise SceneError("trial has no samples")
        times = [s.t for s in self.samples]
        if any(b < a for a, b in zip(times, times[1:])):
            raise SceneError(f"trial {self.index}: sample times decrease")
        # the stylus click freezes the trajectory at its final sample
        last = self.samples[-1].pos
        if (self.click_pos - last).norm() > 1e-9:
            raise SceneError(f"trial {self.index}: click_pos differs from final sample")

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "target": self.target.to_list(),
            "mode": self.mode.value,
            "samples": [[s.t] + s.pos.to_list() for s in self.samples],
            "click_pos": self.click_pos.to_list(),
            "click_t": self.click_t,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Trial":
        return cls(
            index=int(d["index"]),
            target=Vec3.from_seq(d["target"]),
            mode=GuidanceMode.parse(d["mode"]),
            samples=tuple(
                ProbeSample(float(s[0]), Vec3.from_seq(s[1:4])) for s in d["samples"]
            ),
            click_pos=Vec3.from_seq(d["click_pos"]),
            click_t=float(d["click_t"]),
        )


@dataclass(frozen=True)
class Session:
    participant_id: str
    order: GroupOrder
    trials: tuple[Trial, ...]

    def __post_init__(self):
        if len(self.trials) != 30:
            raise SceneError(f"session needs 30 trials, got {len(self.trials)}")
        for i, trial in enumerate(self.trials):
            if trial.index != i + 1:
                raise SceneError(f"trial {i + 1} carries index {trial.index}")
            expected = self.order.modes[i // 10]
            if trial.mode is not expected:
                raise SceneError(
                    f"trial {i + 1}: mode {trial.mode.value}, decade demands {expected.value}"
                )

    def decade_trials(self, decade: int) -> tuple[Trial, ...]:
        if not 1 <= decade <= 3:
            raise SceneError(f"decade {decade} out of range")
        return self.trials[(decade - 1) * 10 : decade * 10]

    def to_dict(self) -> dict:
        return {
            "participant_id": self.participant_id,
            "order": self.order.name,
            "trials": [t.to_dict() for t in self.trials],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Session":
        return cls(
            participant_id=str(d["participant_id"]),
            order=GroupOrder.parse(d["order"]),
            trials=tuple(Trial.from_dict(t) for t in d["trials"]),
        )


def save_session(session: Session, path) -> None:
    with open(path, "w") as fh:
        json.dump(session.to_dict(), fh, indent=1)
        fh.write("\n")


def load_session(path) -> Session:
    with open(path) as fh:
        return Session.from_dict(json.load(fh))


def save_trials_jsonl(trials: Iterable[Trial], path) -> None:
    """One trial per line, for streaming-style appends."""
    with open(path, "w") as fh:
        for t in trials:
            fh.write(json.dumps(t.to_dict()) + "\n")


def load_trials_jsonl(path) -> list[Trial]:
    out = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(Trial.from_dict(json.loads(line)))
    return out
