import itertools
import json
import math

import numpy as np
import pytest

from soniguide.scene import (
    GroupOrder,
    GuidanceMode,
    InvalidRingError,
    ProbeSample,
    RingSpec,
    SceneError,
    Session,
    SkullProxy,
    TargetLayout,
    Trial,
    Vec3,
    displacement,
    generate_layout,
    load_session,
    load_trials_jsonl,
    save_session,
    save_trials_jsonl,
    target_path,
)


def sphere_proxy(r=8.0):
    return SkullProxy(Vec3(0, 0, 0), Vec3(r, r, r))


def six_rings(direction=Vec3(0.0, 1.0, 0.0), radius=2.0):
    return [RingSpec(direction, radius)] * 6


class TestVec3:
    def test_rejects_non_finite(self):
        with pytest.raises(SceneError):
            Vec3(math.nan, 0, 0)
        with pytest.raises(SceneError):
            Vec3(0, math.inf, 0)

    def test_arithmetic(self):
        assert Vec3(1, 2, 3) - Vec3(0, 1, 1) == Vec3(1, 1, 2)
        assert (Vec3(3, 4, 0)).norm() == 5.0


class TestDisplacement:
    def test_zero_at_target(self):
        d = displacement(Vec3(1, 2, 3), Vec3(1, 2, 3))
        assert (d.dx, d.dy, d.dz) == (0.0, 0.0, 0.0)

    def test_target_to_the_right(self):
        d = displacement(Vec3(0, 0, 0), Vec3(3, 0, 0))
        assert (d.dx, d.dy, d.dz) == (3.0, 0.0, 0.0)

    def test_componentwise(self):
        d = displacement(Vec3(1, 1, 1), Vec3(0, 3, -2))
        assert (d.dx, d.dy, d.dz) == (-1.0, 2.0, -3.0)


class TestGenerateLayout:
    def test_sphere_top_ring_symmetry(self):
        # circle on a sphere: equal height, 72 degree azimuth spacing
        layout = generate_layout(sphere_proxy(), six_rings())
        ring = layout.rings[0]
        ys = [t.y for t in ring.targets]
        assert max(ys) - min(ys) < 1e-12
        angles = sorted(math.atan2(t.z, t.x) for t in ring.targets)
        gaps = [b - a for a, b in zip(angles, angles[1:])]
        for g in gaps:
            assert abs(g - 2 * math.pi / 5) < 1e-9

    def test_targets_on_surface(self, layout):
        for t in layout.targets:
            assert abs(layout.proxy.implicit(t) - 1.0) < 1e-6

    def test_targets_on_surface_randomized(self, rng):
        # property: any feasible ring spec projects exactly onto the surface
        for _ in range(50):
            axes = Vec3(*rng.uniform(4.0, 12.0, 3))
            proxy = SkullProxy(Vec3(*rng.uniform(-2.0, 2.0, 3)), axes)
            specs = []
            for _ in range(6):
                d = rng.normal(size=3)
                d[1] = abs(d[1]) + 0.5
                d /= np.linalg.norm(d)
                specs.append(RingSpec(Vec3(*d), float(rng.uniform(0.3, 1.2))))
            layout = generate_layout(proxy, specs)
            for t in layout.targets:
                assert abs(proxy.implicit(t) - 1.0) < 1e-6

    def test_default_layout_distinct_and_separated(self, layout):
        # oracle: brute force over all 435 pairs
        targets = layout.targets
        assert len(targets) == 30
        dists = [(a - b).norm() for a, b in itertools.combinations(targets, 2)]
        assert len(dists) == 435
        assert min(dists) > 1.0

    def test_equal_angular_spacing(self, layout):
        for ring in layout.rings:
            d = ring.direction
            u = d.cross(Vec3(0.0, 1.0, 0.0) if abs(d.y) <= 0.9 else Vec3(1.0, 0.0, 0.0)).normalized()
            v = d.cross(u)
            center = layout.proxy.center
            angles = []
            for t in ring.targets:
                r = t - center
                angles.append(math.atan2(r.dot(v), r.dot(u)))
            gaps = sorted((b - a) % (2 * math.pi) for a, b in zip(angles, angles[1:]))
            for g in gaps:
                assert abs(g - 2 * math.pi / 5) < 1e-9

    def test_below_equator_rejected(self):
        specs = six_rings()
        specs[3] = RingSpec(Vec3(0.0, -1.0, 0.0), 1.0)
        with pytest.raises(InvalidRingError) as exc:
            generate_layout(sphere_proxy(), specs)
        assert exc.value.ring_index == 3

    def test_equator_ring_points_rejected(self):
        # ring axis on the equator dips half its points below
        specs = six_rings()
        specs[0] = RingSpec(Vec3(1.0, 0.0, 0.0), 2.0)
        with pytest.raises(InvalidRingError) as exc:
            generate_layout(sphere_proxy(), specs)
        assert exc.value.ring_index == 0

    def test_deterministic(self, layout_spec):
        a = layout_spec.build_layout()
        b = layout_spec.build_layout()
        assert a.to_dict() == b.to_dict()

    def test_serialization_round_trip(self, layout):
        d = layout.to_dict()
        again = TargetLayout.from_dict(json.loads(json.dumps(d)))
        assert again.to_dict() == d


class TestTargetPath:
    def test_same_seed_same_path(self, layout):
        assert target_path(layout, 99) == target_path(layout, 99)

    def test_is_permutation(self, layout):
        for seed in range(200):
            assert sorted(target_path(layout, seed)) == list(range(30))

    def test_default_seed_pinned(self, layout, layout_spec):
        with open("tests/golden/default_path.json") as fh:
            golden = json.load(fh)
        assert layout_spec.path_seed == golden["seed"]
        path = target_path(layout, layout_spec.path_seed)
        assert path == golden["path"]
        assert path[0] == golden["path"][0]


def short_trial(mode=GuidanceMode.A, index=1):
    samples = (
        ProbeSample(0.0, Vec3(0, 0, 0)),
        ProbeSample(0.1, Vec3(1, 0, 0)),
    )
    return Trial(
        index=index,
        target=Vec3(1, 0, 0),
        mode=mode,
        samples=samples,
        click_pos=samples[-1].pos,
        click_t=0.1,
    )


class TestTrialInvariants:
    def test_click_must_freeze_trajectory(self):
        samples = (ProbeSample(0.0, Vec3(0, 0, 0)),)
        with pytest.raises(SceneError):
            Trial(1, Vec3(0, 0, 0), GuidanceMode.A, samples, Vec3(1, 0, 0), 0.0)

    def test_time_must_not_decrease(self):
        samples = (ProbeSample(0.5, Vec3(0, 0, 0)), ProbeSample(0.1, Vec3(0, 0, 0)))
        with pytest.raises(SceneError):
            Trial(1, Vec3(0, 0, 0), GuidanceMode.A, samples, Vec3(0, 0, 0), 0.1)

    def test_empty_samples_rejected(self):
        with pytest.raises(SceneError):
            Trial(1, Vec3(0, 0, 0), GuidanceMode.A, (), Vec3(0, 0, 0), 0.0)

    def test_index_range(self):
        samples = (ProbeSample(0.0, Vec3(0, 0, 0)),)
        with pytest.raises(SceneError):
            Trial(31, Vec3(0, 0, 0), GuidanceMode.A, samples, Vec3(0, 0, 0), 0.0)


def build_session(order_name="a-v-av"):
    order = GroupOrder.parse(order_name)
    trials = tuple(
        short_trial(mode=order.modes[i // 10], index=i + 1) for i in range(30)
    )
    return Session("p001", order, trials)


class TestSession:
    def test_valid_session(self):
        s = build_session()
        assert len(s.trials) == 30
        assert s.decade_trials(2)[0].mode is GuidanceMode.V

    def test_decade_mode_mismatch_rejected(self):
        order = GroupOrder.parse("a-v-av")
        trials = list(build_session().trials)
        trials[15] = short_trial(mode=GuidanceMode.A, index=16)  # decade 2 wants v
        with pytest.raises(SceneError):
            Session("p001", order, tuple(trials))

    def test_wrong_count_rejected(self):
        s = build_session()
        with pytest.raises(SceneError):
            Session("p001", s.order, s.trials[:20])

    def test_json_round_trip(self, tmp_path):
        s = build_session("av-v-a")
        p = tmp_path / "s.json"
        save_session(s, p)
        again = load_session(p)
        assert again.to_dict() == s.to_dict()
        # bit-exact on re-serialization
        save_session(again, tmp_path / "s2.json")
        assert (tmp_path / "s.json").read_bytes() == (tmp_path / "s2.json").read_bytes()

    def test_invariants_rechecked_on_load(self, tmp_path):
        s = build_session()
        d = s.to_dict()
        d["trials"][5]["mode"] = "av"  # breaks decade consistency
        p = tmp_path / "bad.json"
        p.write_text(json.dumps(d))
        with pytest.raises(SceneError):
            load_session(p)

    def test_jsonl_round_trip(self, tmp_path):
        s = build_session()
        p = tmp_path / "t.jsonl"
        save_trials_jsonl(s.trials, p)
        again = load_trials_jsonl(p)
        assert [t.to_dict() for t in again] == [t.to_dict() for t in s.trials]


class TestGroupOrder:
    def test_all_orders_unique_and_complete(self):
        orders = GroupOrder.all_orders()
        assert len(orders) == 6
        assert len({o.name for o in orders}) == 6

    def test_duplicate_mode_rejected(self):
        with pytest.raises(SceneError):
            GroupOrder((GuidanceMode.A, GuidanceMode.A, GuidanceMode.V))
