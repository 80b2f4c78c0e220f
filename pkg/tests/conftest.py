import numpy as np
import pytest

from soniguide.config import (
    default_layout_spec,
    default_mapping_config,
    default_synth_config,
)
from soniguide.scene import GuidanceMode, ProbeSample, Trial, Vec3


@pytest.fixture(scope="session")
def mcfg():
    return default_mapping_config()


@pytest.fixture(scope="session")
def scfg():
    return default_synth_config()


@pytest.fixture(scope="session")
def layout_spec():
    return default_layout_spec()


@pytest.fixture(scope="session")
def layout(layout_spec):
    return layout_spec.build_layout()


def make_trial(points, dt=1.0 / 60.0, target=Vec3(0.0, 0.0, 0.0),
               mode=GuidanceMode.A, index=1):
    """Trial from a list of (x, y, z) positions at fixed sample spacing."""
    samples = tuple(
        ProbeSample(i * dt, Vec3(*p)) for i, p in enumerate(points)
    )
    return Trial(
        index=index,
        target=target,
        mode=mode,
        samples=samples,
        click_pos=samples[-1].pos,
        click_t=samples[-1].t,
    )


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
