"""Loaders for the pinned default configuration files shipped with the
package, plus helpers to read user-supplied overrides from disk."""

from __future__ import annotations

import json
from importlib import resources

from .mapping import MappingConfig
from .scene import RingSpec, SkullProxy, TargetLayout, Vec3, generate_layout
from .synth import SynthConfig


def packaged_default(name: str) -> dict:
    """Parse one of the JSON default files bundled under soniguide/data."""
    with resources.files("soniguide.data").joinpath(name).open() as fh:
        return json.load(fh)


def read_json(path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def default_mapping_config() -> MappingConfig:
    return MappingConfig.from_dict(packaged_default("mapping.json"))


def default_synth_config() -> SynthConfig:
    return SynthConfig.from_dict(packaged_default("synth.json"))


def mapping_config_from(path=None) -> MappingConfig:
    return MappingConfig.from_dict(read_json(path)) if path else default_mapping_config()


def synth_config_from(path=None) -> SynthConfig:
    return SynthConfig.from_dict(read_json(path)) if path else default_synth_config()


class LayoutSpec:
    """Proxy geometry, ring placement, pinned path seed, and start mark."""

    def __init__(self, d: dict):
        self.proxy = SkullProxy(
            Vec3.from_seq(d["proxy"]["center"]),
            Vec3.from_seq(d["proxy"]["semi_axes"]),
        )
        self.rings = [
            RingSpec(Vec3.from_seq(r["direction"]).normalized(), float(r["radius"]))
            for r in d["rings"]
        ]
        self.path_seed = int(d["path_seed"])
        self.start_mark = Vec3.from_seq(d["start_mark"])

    def build_layout(self) -> TargetLayout:
        return generate_layout(self.proxy, self.rings)


def default_layout_spec() -> LayoutSpec:
    return LayoutSpec(packaged_default("layout.json"))


def layout_spec_from(path=None) -> LayoutSpec:
    return LayoutSpec(read_json(path)) if path else default_layout_spec()


def agent_presets() -> dict:
    return packaged_default("presets.json")
