import math

import numpy as np
import pytest
from scipy import special, stats

from conftest import make_trial
from soniguide.analysis import (
    AnalysisError,
    DecadeMetrics,
    ReportOptions,
    SingularDataError,
    anova_oneway,
    betainc_reg,
    bonferroni,
    decade_metrics,
    f_sf,
    iqr_filter,
    manova_oneway,
    path_length,
    posthoc_pairwise,
    precision,
    report,
)
from soniguide.scene import GroupOrder, GuidanceMode, Vec3


# -- independent oracles -----------------------------------------------------

def anova_brute(groups):
    """ANOVA F by explicit sum-of-squares loops."""
    all_vals = [v for g in groups for v in g]
    grand = sum(all_vals) / len(all_vals)
    ssb = 0.0
    ssw = 0.0
    for g in groups:
        m = sum(g) / len(g)
        ssb += len(g) * (m - grand) ** 2
        for v in g:
            ssw += (v - m) ** 2
    df_b = len(groups) - 1
    df_w = len(all_vals) - len(groups)
    return (ssb / df_b) / (ssw / df_w), ssb / (ssb + ssw), df_b, df_w


def det_brute(m):
    """Determinant by cofactor expansion; fine for p <= 3."""
    n = len(m)
    if n == 1:
        return m[0][0]
    if n == 2:
        return m[0][0] * m[1][1] - m[0][1] * m[1][0]
    total = 0.0
    for j in range(n):
        minor = [row[:j] + row[j + 1 :] for row in m[1:]]
        total += ((-1) ** j) * m[0][j] * det_brute(minor)
    return total


def wilks_brute(groups):
    """Wilks' lambda from scatter matrices built with plain loops."""
    p = len(groups[0][0])
    all_rows = [row for g in groups for row in g]
    n = len(all_rows)
    grand = [sum(r[j] for r in all_rows) / n for j in range(p)]
    w = [[0.0] * p for _ in range(p)]
    t = [[0.0] * p for _ in range(p)]
    for g in groups:
        mean = [sum(r[j] for r in g) / len(g) for j in range(p)]
        for r in g:
            for a in range(p):
                for b in range(p):
                    w[a][b] += (r[a] - mean[a]) * (r[b] - mean[b])
    for r in all_rows:
        for a in range(p):
            for b in range(p):
                t[a][b] += (r[a] - grand[a]) * (r[b] - grand[b])
    return det_brute(w) / det_brute(t)


# -- trajectory measures -----------------------------------------------------

class TestPathLength:
    def test_three_four_five(self):
        trial = make_trial([(0, 0, 0), (3, 4, 0)])
        assert path_length(trial) == pytest.approx(5.0, abs=1e-12)

    def test_single_sample(self):
        trial = make_trial([(1, 2, 3)])
        assert path_length(trial) == 0.0

    def test_staircase_additivity(self):
        pts = [(0, 0, 0)]
        for i in range(10):
            p = list(pts[-1])
            p[i % 3] += 1.0
            pts.append(tuple(p))
        assert path_length(make_trial(pts)) == pytest.approx(10.0, abs=1e-12)


class TestPrecision:
    def test_click_on_target(self):
        trial = make_trial([(1, 2, 3)], target=Vec3(1, 2, 3))
        assert precision(trial, trial.target) == (0.0, 0.0, 0.0, 0.0)

    def test_offset_components(self):
        trial = make_trial([(0.3, 0.4, 0.0)], target=Vec3(0, 0, 0))
        prec, px, py, pz = precision(trial, trial.target)
        assert prec == pytest.approx(0.5, abs=1e-12)
        assert (px, py, pz) == (0.3, 0.4, 0.0)


class TestIqrFilter:
    def test_tight_spread_keeps_all(self):
        rep = iqr_filter([1, 2, 3, 4, 5])
        assert rep.removed == ()
        assert rep.kept == (1, 2, 3, 4, 5)

    def test_constant_keeps_all(self):
        rep = iqr_filter([5, 5, 5, 5, 5])
        assert rep.removed == ()
        assert rep.iqr == 0.0

    def test_outlier_removed_hand_computed(self):
        # rank p*(n-1): q1 at rank 1 -> 2, q3 at rank 3 -> 4, fence 4+3=7
        rep = iqr_filter([1, 2, 3, 4, 100])
        assert rep.q1 == 2.0
        assert rep.q3 == 4.0
        assert rep.removed == (100.0,)

    def test_too_few_values(self):
        with pytest.raises(AnalysisError):
            iqr_filter([1, 2, 3])

    def test_partition_property(self, rng):
        for _ in range(100):
            vals = list(rng.normal(0, 1, int(rng.integers(4, 40))))
            vals += list(rng.uniform(5, 50, int(rng.integers(0, 4))))
            rep = iqr_filter(vals)
            assert sorted(rep.kept + rep.removed) == sorted(vals)
            lo, hi = rep.q1 - 1.5 * rep.iqr, rep.q3 + 1.5 * rep.iqr
            assert all(v > hi or v < lo for v in rep.removed)
            assert all(lo <= v <= hi for v in rep.kept)


class TestDecadeMetrics:
    def test_all_clicks_on_target(self):
        order = GroupOrder.parse("a-v-av")
        trials = []
        for i in range(30):
            trials.append(
                make_trial(
                    [(float(i), 0.0, 0.0)],
                    target=Vec3(float(i), 0.0, 0.0),
                    mode=order.modes[i // 10],
                    index=i + 1,
                )
            )
        from soniguide.scene import Session

        session = Session("p", order, tuple(trials))
        for dm in decade_metrics(session):
            assert dm.prec == dm.prec_x == dm.prec_y == dm.prec_z == 0.0

    def test_sums_and_means_match_brute_force(self, rng):
        from soniguide.scene import Session

        order = GroupOrder.parse("v-a-av")
        trials = []
        for i in range(30):
            pts = [tuple(p) for p in rng.uniform(-5, 5, (4, 3))]
            trials.append(
                make_trial(pts, dt=0.25, target=Vec3(*rng.uniform(-5, 5, 3)),
                           mode=order.modes[i // 10], index=i + 1)
            )
        session = Session("p", order, tuple(trials))
        mets = decade_metrics(session)
        for d in range(3):
            chunk = trials[d * 10 : (d + 1) * 10]
            t_sum = sum(t.click_t for t in chunk)
            l_sum = 0.0
            for t in chunk:
                for a, b in zip(t.samples, t.samples[1:]):
                    l_sum += math.sqrt(
                        (b.pos.x - a.pos.x) ** 2
                        + (b.pos.y - a.pos.y) ** 2
                        + (b.pos.z - a.pos.z) ** 2
                    )
            p_mean = sum(
                math.sqrt(
                    (t.click_pos.x - t.target.x) ** 2
                    + (t.click_pos.y - t.target.y) ** 2
                    + (t.click_pos.z - t.target.z) ** 2
                )
                for t in chunk
            ) / 10.0
            assert mets[d].time == pytest.approx(t_sum, rel=1e-12)
            assert mets[d].length == pytest.approx(l_sum, rel=1e-12)
            assert mets[d].prec == pytest.approx(p_mean, rel=1e-12)


class TestIncompleteBeta:
    def test_matches_scipy_on_grid(self):
        for a in (0.5, 1.0, 2.5, 8.0, 15.0):
            for b in (0.5, 1.0, 3.0, 10.0):
                for x in (0.001, 0.1, 0.37, 0.5, 0.82, 0.999):
                    mine = betainc_reg(a, b, x)
                    ref = float(special.betainc(a, b, x))
                    assert mine == pytest.approx(ref, rel=1e-10, abs=1e-13)

    def test_f_survival_matches_scipy(self):
        for f in (0.1, 1.0, 3.26, 26.54):
            for df1, df2 in ((2, 16), (12, 22), (1, 30), (5, 7)):
                assert f_sf(f, df1, df2) == pytest.approx(
                    float(stats.f.sf(f, df1, df2)), rel=1e-9
                )


class TestAnova:
    def test_identical_groups(self):
        res = anova_oneway([[1.0, 2.0, 3.0], [1.0, 2.0, 3.0]])
        assert res.f == 0.0
        assert res.partial_eta2 == 0.0

    def test_example_against_brute_force(self):
        groups = [[1, 2, 3], [2, 3, 4], [3, 4, 5]]
        res = anova_oneway(groups)
        f_ref, eta_ref, dfb, dfw = anova_brute(groups)
        assert res.f == pytest.approx(f_ref, rel=1e-12)
        assert res.partial_eta2 == pytest.approx(eta_ref, rel=1e-12)
        assert (res.df_between, res.df_within) == (dfb, dfw)
        assert res.p == pytest.approx(float(stats.f.sf(f_ref, dfb, dfw)), rel=1e-9)

    def test_shift_invariance(self, rng):
        groups = [list(rng.normal(0, 1, 6)) for _ in range(3)]
        shifted = [[v + 1234.5 for v in g] for g in groups]
        assert anova_oneway(groups).f == pytest.approx(anova_oneway(shifted).f, rel=1e-9)

    def test_random_instances_against_oracle(self, rng):
        for _ in range(50):
            k = int(rng.integers(2, 5))
            groups = [list(rng.normal(rng.uniform(-1, 1), 1.0, int(rng.integers(2, 9))))
                      for _ in range(k)]
            res = anova_oneway(groups)
            f_ref, eta_ref, dfb, dfw = anova_brute(groups)
            assert res.f == pytest.approx(f_ref, rel=1e-9)
            assert res.partial_eta2 == pytest.approx(eta_ref, rel=1e-9)
            assert res.p == pytest.approx(float(stats.f.sf(f_ref, dfb, dfw)), rel=1e-9, abs=1e-12)

    def test_degenerate_all_equal(self):
        res = anova_oneway([[2.0, 2.0], [2.0, 2.0]])
        assert res.f == 0.0 and res.p == 1.0

    def test_reorder_invariance(self, rng):
        groups = [list(rng.normal(0, 1, 7)) for _ in range(3)]
        rev = [g[::-1] for g in groups[::-1]]
        assert anova_oneway(groups).f == pytest.approx(anova_oneway(rev).f, rel=1e-12)


class TestManova:
    def test_copies_give_lambda_one(self):
        g = [[1.0, 2.0], [2.0, 1.0], [3.0, 3.0], [0.0, 1.0]]
        res = manova_oneway([g, g, g])
        assert res.wilks_lambda == pytest.approx(1.0, abs=1e-12)
        assert res.partial_eta2 == pytest.approx(0.0, abs=1e-12)

    def test_one_variable_reduces_to_anova(self, rng):
        for _ in range(20):
            groups = [list(rng.normal(rng.uniform(-1, 1), 1.0, int(rng.integers(3, 9))))
                      for _ in range(3)]
            vec_groups = [[[v] for v in g] for g in groups]
            mv = manova_oneway(vec_groups)
            uv = anova_oneway(groups)
            assert mv.f_approx == pytest.approx(uv.f, rel=1e-9)
            assert mv.df1 == uv.df_between
            assert mv.df2 == uv.df_within
            assert mv.p == pytest.approx(uv.p, rel=1e-9, abs=1e-12)

    def test_random_instance_against_determinant_oracle(self, rng):
        for _ in range(30):
            groups = [
                [list(row) for row in rng.normal(rng.uniform(-1, 1), 1.0, (int(rng.integers(4, 10)), 2))]
                for _ in range(3)
            ]
            res = manova_oneway(groups)
            assert res.wilks_lambda == pytest.approx(wilks_brute(groups), rel=1e-9)

    def test_three_variable_oracle(self, rng):
        groups = [
            [list(row) for row in rng.normal(0.0, 1.0, (8, 3))] for _ in range(3)
        ]
        res = manova_oneway(groups)
        assert res.wilks_lambda == pytest.approx(wilks_brute(groups), rel=1e-9)

    def test_partial_eta2_convention(self, rng):
        groups = [
            [list(row) for row in rng.normal(i * 0.5, 1.0, (6, 2))] for i in range(3)
        ]
        res = manova_oneway(groups)
        s = min(2, len(groups) - 1)
        assert res.partial_eta2 == pytest.approx(1 - res.wilks_lambda ** (1 / s), rel=1e-12)

    def test_singular_within_rejected(self):
        # second variable is a copy of the first: W is rank deficient
        groups = [
            [[v, v] for v in (1.0, 2.0, 3.0, 4.0)],
            [[v, v] for v in (2.0, 3.0, 4.0, 5.0)],
        ]
        with pytest.raises(SingularDataError):
            manova_oneway(groups)

    def test_too_few_observations(self):
        groups = [[[1.0, 2.0, 3.0]], [[2.0, 3.0, 4.0]]]
        with pytest.raises(AnalysisError):
            manova_oneway(groups)

    def test_location_invariance(self, rng):
        groups = [
            [list(row) for row in rng.normal(0.0, 1.0, (6, 2))] for _ in range(3)
        ]
        shifted = [[[v + 55.5 for v in row] for row in g] for g in groups]
        assert manova_oneway(groups).wilks_lambda == pytest.approx(
            manova_oneway(shifted).wilks_lambda, rel=1e-9
        )


class TestPosthoc:
    def test_identical_groups_p_one(self):
        p = posthoc_pairwise([[1.0, 2.0, 3.0, 4.0], [1.0, 2.0, 3.0, 4.0]], seed=1)
        assert p[(0, 1)] == 1.0

    def test_complete_separation_small_p(self):
        groups = [[0.0] * 8, [10.0] * 8]
        p = posthoc_pairwise(groups, n_permutations=999, seed=1)[(0, 1)]
        assert p >= 1.0 / 1000.0       # the resolution floor
        assert p < 0.01

    def test_seeded_determinism(self, rng):
        groups = [list(rng.normal(0, 1, 8)) for _ in range(3)]
        a = posthoc_pairwise(groups, seed=9)
        b = posthoc_pairwise(groups, seed=9)
        assert a == b

    def test_all_pairs_present(self):
        p = posthoc_pairwise([[1.0, 2.0]] * 4, n_permutations=99, seed=0)
        assert set(p) == {(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)}


class TestBonferroni:
    def test_alpha_01_over_6(self):
        dec = bonferroni([0.001, 0.002, 0.5, 0.9, 0.01, 0.0001], alpha=0.01)
        assert dec.threshold == pytest.approx(0.01 / 6, rel=1e-12)
        assert round(dec.threshold, 4) == 0.0017
        assert dec.reject == (True, False, False, False, False, True)

    def test_alpha_05_over_6(self):
        dec = bonferroni([0.5] * 6, alpha=0.05)
        assert dec.threshold == pytest.approx(0.05 / 6, rel=1e-12)
        assert round(dec.threshold, 3) == 0.008

    def test_single_test_threshold_is_alpha(self):
        assert bonferroni([0.2], alpha=0.05).threshold == 0.05


class TestReport:
    def corpus(self, layout, layout_spec, mcfg, preset="default", n=12, seed=100):
        from soniguide.agents import policies_from_preset, synthesize_session
        from soniguide.config import agent_presets
        from soniguide.scene import target_path

        path = target_path(layout, layout_spec.path_seed)
        policies = policies_from_preset(agent_presets()[preset])
        orders = GroupOrder.all_orders()
        return [
            synthesize_session(
                layout=layout, path=path, policies=policies,
                order=orders[i % 6], mcfg=mcfg,
                start_mark=layout_spec.start_mark,
                participant_id=f"p{i:03d}", seed=seed + i,
            )
            for i in range(n)
        ]

    def test_csv_deterministic(self, layout, layout_spec, mcfg):
        sessions = self.corpus(layout, layout_spec, mcfg)
        a = report(sessions, ReportOptions(seed=3)).to_csv()
        b = report(sessions, ReportOptions(seed=3)).to_csv()
        assert a == b
        assert a.startswith("decade,measure,mode,")

    def test_underpowered_warning(self, layout, layout_spec, mcfg):
        sessions = self.corpus(layout, layout_spec, mcfg, n=1)
        rep = report(sessions, ReportOptions(seed=3))
        assert any("under-powered" in w for w in rep.warnings)

    def test_aud_slow_marks_visual_better(self, layout, layout_spec, mcfg):
        sessions = self.corpus(layout, layout_spec, mcfg, preset="aud-slow", n=24)
        rep = report(sessions, ReportOptions(seed=3))
        for block in rep.decades:
            time_row = next(r for r in block.rows if r.measure == "time")
            assert "v" in time_row.cells[GuidanceMode.A].better

    def test_text_table_shape(self, layout, layout_spec, mcfg):
        sessions = self.corpus(layout, layout_spec, mcfg)
        txt = report(sessions, ReportOptions(seed=3)).to_text()
        assert "decade 1" in txt and "decade 3" in txt
        for m in ("time", "length", "prec_z"):
            assert m in txt
