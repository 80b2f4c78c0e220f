"""Block-based mono renderer for the guidance sound.

The bed is a Shepard tone: one partial per octave gliding under a Gaussian
spectral envelope in log2-frequency. Partials wrap around the band edges,
so constant chroma rotation never changes the overall pitch height. On top
of the bed sit an 80 Hz phase modulator (roughness), a sinusoidal gain
fluctuation (beats), envelope shift (brightness) and narrowing (fullness),
a gated pink-noise proximity layer, and one-shot click/chord events.

Per-sample envelope renormalization holds the bed's RMS constant while the
envelope moves or narrows, which is what lets narrowing read as "thinner"
rather than "quieter".
"""

from __future__ import annotations

import math
import struct
import wave
from dataclasses import dataclass, field

import numpy as np
from scipy import signal as _signal

from .mapping import MappingConfig, SoniParams, map_displacement, detect_crossings
from .scene import Trial, Vec3, displacement

TWO_PI = 2.0 * math.pi

# 3-stage pinking cascade for 44.1 kHz white input; -3 dB/oct within
# +-0.5 dB over 100 Hz..8 kHz (band-energy check in the test suite)
_PINK_POLES = np.array([0.99572754, 0.94790649, 0.53567505])
_PINK_ZEROS = np.array([0.98443604, 0.83392334, 0.07568359])
_PINK_B = np.poly(_PINK_ZEROS)
_PINK_A = np.poly(_PINK_POLES)
_PINK_RMS_NORM = 3.35      # measured output RMS for uniform white input ~1.0

CLICK_DUR_S = 0.001
CHORD_ROOT_HZ = 523.25     # C5; components at ratios 4:5:6
CHORD_DUR_S = 0.3
CHORD_TAU_S = CHORD_DUR_S / 6.0   # amplitude down ~e^-6 before truncation


class SynthError(ValueError):
    """Invalid synth configuration or state/config mismatch."""


@dataclass(frozen=True)
class SynthConfig:
    sample_rate: int = 44100
    block_size: int = 512
    f_lo: float = 40.0
    f_hi: float = 10240.0
    env_center: float = 9.321928094887362   # log2(640 Hz)
    env_sigma: float = 1.5                   # octaves
    fm_freq: float = 80.0                    # roughness modulator
    master_gain: float = 1.0
    gain_shepard: float = 0.2
    gain_noise: float = 0.04
    gain_click: float = 0.15
    gain_chord: float = 0.06                 # per chord component

    def __post_init__(self):
        if self.sample_rate <= 0 or self.block_size <= 0:
            raise SynthError("sample_rate and block_size must be positive")
        if not 0.0 < self.f_lo < self.f_hi:
            raise SynthError(f"need 0 < f_lo < f_hi, got {self.f_lo}, {self.f_hi}")
        octaves = math.log2(self.f_hi / self.f_lo)
        if abs(octaves - round(octaves)) > 1e-9 or round(octaves) < 1:
            raise SynthError(
                f"f_hi/f_lo must be an exact power of two, got {self.f_hi / self.f_lo}"
            )
        if self.env_sigma <= 0.0:
            raise SynthError("env_sigma must be positive")

    @property
    def n_octaves(self) -> int:
        return int(round(math.log2(self.f_hi / self.f_lo)))

    @property
    def n_partials(self) -> int:
        # one partial per octave: f_lo * 2^k for k = 0 .. n-1
        return self.n_octaves

    @property
    def block_dt(self) -> float:
        return self.block_size / self.sample_rate

    def to_dict(self) -> dict:
        return {
            "sample_rate": self.sample_rate,
            "block_size": self.block_size,
            "f_lo": self.f_lo,
            "f_hi": self.f_hi,
            "env_center": self.env_center,
            "env_sigma": self.env_sigma,
            "fm_freq": self.fm_freq,
            "master_gain": self.master_gain,
            "gain_shepard": self.gain_shepard,
            "gain_noise": self.gain_noise,
            "gain_click": self.gain_click,
            "gain_chord": self.gain_chord,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SynthConfig":
        return cls(**d)


@dataclass
class _Event:
    kind: str                 # "click" | "chord"
    buf: np.ndarray           # full pre-rendered waveform
    age: int = 0              # samples already emitted


@dataclass
class SynthState:
    """Mutable render state; owned by exactly one renderer."""

    cfg: SynthConfig
    partial_logf: np.ndarray          # log2 Hz, in [log2 f_lo, log2 f_hi)
    partial_phase: np.ndarray         # rad, [0, 2pi)
    am_phase: float = 0.0
    fm_phase: float = 0.0
    active_events: list = field(default_factory=list)
    noise_zi: np.ndarray = field(default_factory=lambda: np.zeros(3))
    rng: np.random.Generator = field(default_factory=lambda: np.random.default_rng(0))
    rng_seed: int = 0
    clip_guard_engaged: int = 0       # samples clamped by the safety limiter


def init_state(cfg: SynthConfig, seed: int = 0) -> SynthState:
    """Fresh deterministic state: octave-spaced partials, zero phases."""
    logf = math.log2(cfg.f_lo) + np.arange(cfg.n_partials, dtype=float)
    return SynthState(
        cfg=cfg,
        partial_logf=logf,
        partial_phase=np.zeros(cfg.n_partials),
        rng=np.random.default_rng(seed),
        rng_seed=seed,
    )


def trigger_event(state: SynthState, kind: str) -> None:
    """Queue a one-shot event; it mixes into subsequent blocks until spent."""
    cfg = state.cfg
    fs = cfg.sample_rate
    if kind == "click":
        n = max(2, int(round(CLICK_DUR_S * fs)))
        env = 0.5 * (1.0 - np.cos(TWO_PI * np.arange(n) / (n - 1)))  # raised cosine
        buf = cfg.gain_click * env * state.rng.uniform(-1.0, 1.0, n)
    elif kind == "chord":
        n = int(round(CHORD_DUR_S * fs))
        t = np.arange(n) / fs
        env = np.exp(-t / CHORD_TAU_S)
        buf = np.zeros(n)
        for ratio in (1.0, 1.25, 1.5):
            buf += np.sin(TWO_PI * CHORD_ROOT_HZ * ratio * t)
        buf *= cfg.gain_chord * env
    else:
        raise SynthError(f"unknown event kind {kind!r}")
    state.active_events.append(_Event(kind, buf))


def _pink_block(state: SynthState, n: int) -> np.ndarray:
    white = state.rng.uniform(-1.0, 1.0, n)
    out, state.noise_zi = _signal.lfilter(_PINK_B, _PINK_A, white, zi=state.noise_zi)
    return out / _PINK_RMS_NORM


def render_block(state: SynthState, params: SoniParams, cfg: SynthConfig) -> np.ndarray:
    """Render one block and advance the state in place.

    Returns float samples in [-1, 1]; the final clamp is a safety guard
    only and `state.clip_guard_engaged` counts any sample it touched.
    """
    if cfg is not state.cfg and cfg != state.cfg:
        raise SynthError("state was initialized with a different config")
    n = cfg.block_size
    fs = cfg.sample_rate
    log_lo = math.log2(cfg.f_lo)
    band = float(cfg.n_octaves)
    t = np.arange(n) / fs

    # partials glide in log2-frequency and wrap at the band edges
    logf = state.partial_logf[:, None] + params.chroma_rate * t[None, :]
    logf = log_lo + np.mod(logf - log_lo, band)
    freq = np.exp2(logf)

    dphi = TWO_PI * freq / fs
    phase = state.partial_phase[:, None] + np.cumsum(dphi, axis=1) - dphi

    if params.fm_index > 0.0:
        phase = phase + params.fm_index * np.sin(
            state.fm_phase + TWO_PI * cfg.fm_freq * t
        )[None, :]

    # Gaussian envelope in log2-f, renormalized per sample so the bed RMS
    # is independent of shift, narrowing, and chroma position
    center = cfg.env_center + params.brightness_shift
    sigma = cfg.env_sigma * params.fullness
    w = np.exp(-0.5 * ((logf - center) / sigma) ** 2)
    w /= np.sqrt(np.sum(w * w, axis=0, keepdims=True))

    bed = np.sum(w * np.sin(phase), axis=0)

    if params.am_freq > 0.0:
        gain = 0.75 + 0.25 * np.sin(state.am_phase + TWO_PI * params.am_freq * t)
        bed = bed * gain

    out = cfg.gain_shepard * bed

    if params.proximity_noise and cfg.gain_noise > 0.0:
        out = out + cfg.gain_noise * _pink_block(state, n)

    if state.active_events:
        keep = []
        for ev in state.active_events:
            seg = ev.buf[ev.age : ev.age + n]
            out[: len(seg)] += seg
            ev.age += n
            if ev.age < len(ev.buf):
                keep.append(ev)
        state.active_events = keep

    out *= cfg.master_gain

    over = np.abs(out) > 1.0
    if over.any():
        state.clip_guard_engaged += int(over.sum())
        np.clip(out, -1.0, 1.0, out=out)

    # advance state
    state.partial_logf = log_lo + np.mod(
        state.partial_logf + params.chroma_rate * n / fs - log_lo, band
    )
    state.partial_phase = np.mod(state.partial_phase + dphi.sum(axis=1), TWO_PI)
    if params.am_freq > 0.0:
        state.am_phase = math.fmod(state.am_phase + TWO_PI * params.am_freq * n / fs, TWO_PI)
    else:
        state.am_phase = 0.0
    state.fm_phase = math.fmod(state.fm_phase + TWO_PI * cfg.fm_freq * n / fs, TWO_PI)
    return out


@dataclass(frozen=True)
class TrajectoryRender:
    samples: np.ndarray
    events: tuple    # (block_index, kind) pairs in trigger order

    @property
    def click_count(self) -> int:
        return sum(1 for _, k in self.events if k == "click")

    @property
    def chord_count(self) -> int:
        return sum(1 for _, k in self.events if k == "chord")


def render_trajectory(
    trial: Trial,
    target: Vec3,
    mcfg: MappingConfig,
    scfg: SynthConfig,
    seed: int = 0,
) -> TrajectoryRender:
    """Sonify a recorded trajectory offline.

    Probe positions are held zero-order between samples and refreshed at
    block rate; height/depth crossings are detected on the raw sample
    sequence and injected into the block covering the crossing sample, so
    the event count never depends on the block/sample rate ratio.
    """
    samples = trial.samples
    t0 = samples[0].t
    span = samples[-1].t - t0
    if span <= 0.0:
        raise SynthError("trial trajectory spans no time")
    fs = scfg.sample_rate
    block_dt = scfg.block_dt
    n_blocks = max(1, math.ceil(span / block_dt))

    # crossing events from the raw samples, scheduled by block index
    pending: dict[int, list[str]] = {}
    events_log = []
    for prev, cur in zip(samples, samples[1:]):
        ev = detect_crossings(prev.pos, cur.pos, target)
        if not (ev.height_crossed or ev.depth_crossed):
            continue
        block = min(int((cur.t - t0) / block_dt), n_blocks - 1)
        kinds = pending.setdefault(block, [])
        if ev.height_crossed:
            kinds.append("click")
        if ev.depth_crossed:
            kinds.append("chord")

    state = init_state(scfg, seed)
    out = np.empty(n_blocks * scfg.block_size)
    si = 0   # index of the latest sample not later than the block start
    for b in range(n_blocks):
        bt = t0 + b * block_dt
        while si + 1 < len(samples) and samples[si + 1].t <= bt:
            si += 1
        params = map_displacement(displacement(samples[si].pos, target), mcfg)
        for kind in pending.get(b, ()):
            trigger_event(state, kind)
            events_log.append((b, kind))
        out[b * scfg.block_size : (b + 1) * scfg.block_size] = render_block(
            state, params, scfg
        )
    return TrajectoryRender(samples=out, events=tuple(events_log))


def float_to_pcm16(samples: np.ndarray) -> np.ndarray:
    """Scale by 32767 and round half away from zero."""
    scaled = samples * 32767.0
    ints = np.sign(scaled) * np.floor(np.abs(scaled) + 0.5)
    return np.clip(ints, -32768, 32767).astype("<i2")


def write_wav(path, samples: np.ndarray, sample_rate: int = 44100) -> None:
    """Mono 16-bit little-endian RIFF/WAVE."""
    pcm = float_to_pcm16(samples)
    with wave.open(str(path), "wb") as wf:
        wf.setnchannels(1)
        wf.setsampwidth(2)
        wf.setframerate(sample_rate)
        wf.writeframes(pcm.tobytes())


def pcm16_frame(samples: np.ndarray, seq: int) -> bytes:
    """Wire format for one streamed block: 8-byte LE sequence number + PCM."""
    return struct.pack("<Q", seq) + float_to_pcm16(samples).tobytes()
