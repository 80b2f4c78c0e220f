"""Closed-loop virtual navigators.

An agent never sees the true displacement: it decodes the sound-parameter
frame back into a displacement estimate (the mapping's inverse on the
unsaturated range) and steps proportionally toward it. This closes the
loop at the parameter level and doubles as the generator of synthetic
sessions for the statistics pipeline.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mapping import MappingConfig, MappingError, SoniParams, map_displacement
from .scene import (
    Displacement,
    GroupOrder,
    GuidanceMode,
    ProbeSample,
    Session,
    TargetLayout,
    Trial,
    Vec3,
    displacement,
)


@dataclass(frozen=True)
class AgentPolicy:
    """Proportional-control navigator parameters.

    gain is in cm per step per unit of normalized (distance/saturation)
    parameter; the agent clicks once its decoded distance estimate stays
    below click_threshold for click_count consecutive steps.
    """

    gain: float = 5.0
    step_hz: float = 60.0
    noise_sigma: float = 0.05       # cm, per-axis actuation noise
    click_threshold: float = 0.3    # cm, on the decoded estimate
    click_count: int = 10
    step_cap: int = 5000

    def __post_init__(self):
        if self.gain <= 0.0 or self.step_hz <= 0.0 or self.noise_sigma < 0.0:
            raise ValueError(f"bad policy {self}")

    @classmethod
    def from_dict(cls, d: dict) -> "AgentPolicy":
        return cls(**d)


@dataclass(frozen=True)
class Episode:
    start: Vec3
    target: Vec3
    trajectory: tuple[ProbeSample, ...]
    converged: bool
    steps: int

    @property
    def final_distance(self) -> float:
        return (self.trajectory[-1].pos - self.target).norm()


def decode(params: SoniParams, cfg: MappingConfig) -> Displacement:
    """Invert the mapping on its bijective range.

    Saturated cues decode to the saturation distance; a silent axis (the
    deadzone ambiguity) decodes to zero.
    """
    if params.am_freq > 0.0 and params.fm_index > 0.0:
        raise MappingError("inconsistent frame: both up and down cues active")
    if params.brightness_shift > 0.0 and params.fullness < 1.0:
        raise MappingError("inconsistent frame: both back and front cues active")
    dzx, dzy, dzz = cfg.deadzone

    dx = (params.chroma_rate / cfg.omega_max) * cfg.x_sat

    if params.am_freq > 0.0:
        frac = (params.am_freq - cfg.am_freq_min) / (cfg.am_freq_max - cfg.am_freq_min)
        dy = dzy + max(0.0, min(frac, 1.0)) * (cfg.y_sat - dzy)
    elif params.fm_index > 0.0:
        dy = -(params.fm_index / cfg.beta_max) * cfg.y_sat
    else:
        dy = 0.0

    if params.brightness_shift > 0.0:
        dz = (params.brightness_shift / cfg.shift_max) * cfg.z_sat
    elif params.fullness < 1.0:
        dz = -(1.0 - params.fullness) / (1.0 - cfg.fullness_min) * cfg.z_sat
    else:
        dz = 0.0

    return Displacement(dx, dy, dz)


def run_episode(
    start: Vec3,
    target: Vec3,
    policy: AgentPolicy,
    mcfg: MappingConfig,
    rng: np.random.Generator | None = None,
) -> Episode:
    """Navigate from start toward target through the map/decode loop."""
    if rng is None:
        rng = np.random.default_rng(0)
    dt = 1.0 / policy.step_hz
    sats = (mcfg.x_sat, mcfg.y_sat, mcfg.z_sat)
    pos = start
    traj = [ProbeSample(0.0, pos)]
    below = 0
    converged = False
    steps = 0
    while steps < policy.step_cap:
        est = decode(map_displacement(displacement(pos, target), mcfg), mcfg)
        if est.norm() < policy.click_threshold:
            below += 1
            if below >= policy.click_count:
                converged = True
                break
        else:
            below = 0
        noise = rng.normal(0.0, policy.noise_sigma, 3) if policy.noise_sigma > 0 else (0.0, 0.0, 0.0)
        pos = Vec3(
            pos.x + policy.gain * est.dx / sats[0] + noise[0],
            pos.y + policy.gain * est.dy / sats[1] + noise[1],
            pos.z + policy.gain * est.dz / sats[2] + noise[2],
        )
        steps += 1
        traj.append(ProbeSample(steps * dt, pos))
    return Episode(
        start=start,
        target=target,
        trajectory=tuple(traj),
        converged=converged,
        steps=steps,
    )


def episode_to_trial(episode: Episode, index: int, mode: GuidanceMode) -> Trial:
    last = episode.trajectory[-1]
    return Trial(
        index=index,
        target=episode.target,
        mode=mode,
        samples=episode.trajectory,
        click_pos=last.pos,
        click_t=last.t,
    )


def synthesize_session(
    layout: TargetLayout,
    path: list[int],
    policies: dict[GuidanceMode, AgentPolicy],
    order: GroupOrder,
    mcfg: MappingConfig,
    start_mark: Vec3,
    participant_id: str,
    seed: int,
) -> Session:
    """Run 30 chained episodes under the decade mode schedule.

    Each trial starts where the previous click landed, mirroring how a
    participant moves on from target to target.
    """
    rng = np.random.default_rng(seed)
    targets = layout.targets
    pos = start_mark
    trials = []
    for i, tidx in enumerate(path):
        mode = order.modes[i // 10]
        episode = run_episode(pos, targets[tidx], policies[mode], mcfg, rng)
        trials.append(episode_to_trial(episode, i + 1, mode))
        pos = episode.trajectory[-1].pos
    return Session(participant_id=participant_id, order=order, trials=tuple(trials))


def policies_from_preset(preset: dict) -> dict[GuidanceMode, AgentPolicy]:
    return {GuidanceMode.parse(k): AgentPolicy.from_dict(v) for k, v in preset.items()}
