"""Per-decade performance measures and the inferential statistics used to
compare guidance modes: IQR outlier filtering, one-way ANOVA/MANOVA with
Wilks' lambda and partial eta squared, permutation post-hoc tests, and
Bonferroni-corrected significance reporting as CSV plus aligned text."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .scene import GuidanceMode, Session, Trial, Vec3

MEASURES = ("time", "length", "prec", "prec_x", "prec_y", "prec_z")
MODES = (GuidanceMode.A, GuidanceMode.V, GuidanceMode.AV)


class AnalysisError(ValueError):
    """Bad input to a metric or statistic."""


class SingularDataError(AnalysisError):
    """Within-group scatter matrix is singular; drop variables or add data."""


# ---------------------------------------------------------------------------
# trajectory measures

def path_length(trial: Trial) -> float:
    """Total length of the sampled trajectory in cm."""
    if not trial.samples:
        raise AnalysisError("trial has no samples")
    total = 0.0
    for a, b in zip(trial.samples, trial.samples[1:]):
        total += (b.pos - a.pos).norm()
    return total


def precision(trial: Trial, target: Vec3) -> tuple[float, float, float, float]:
    """Click error: Euclidean overall plus absolute per-axis components."""
    e = trial.click_pos - target
    return (e.norm(), abs(e.x), abs(e.y), abs(e.z))


@dataclass(frozen=True)
class DecadeMetrics:
    decade: int
    mode: GuidanceMode
    time: float       # s, cumulated over the 10 trials
    length: float     # cm, cumulated
    prec: float       # cm, mean click error
    prec_x: float
    prec_y: float
    prec_z: float

    def value(self, measure: str) -> float:
        return getattr(self, measure)

    def vector(self) -> list[float]:
        return [self.value(m) for m in MEASURES]


def decade_metrics(session: Session) -> list[DecadeMetrics]:
    """The six measures for each of the session's three decades."""
    out = []
    for decade in (1, 2, 3):
        trials = session.decade_trials(decade)
        precs = [precision(t, t.target) for t in trials]
        out.append(
            DecadeMetrics(
                decade=decade,
                mode=trials[0].mode,
                time=sum(t.click_t for t in trials),
                length=sum(path_length(t) for t in trials),
                prec=sum(p[0] for p in precs) / len(precs),
                prec_x=sum(p[1] for p in precs) / len(precs),
                prec_y=sum(p[2] for p in precs) / len(precs),
                prec_z=sum(p[3] for p in precs) / len(precs),
            )
        )
    return out


# ---------------------------------------------------------------------------
# outlier filtering

@dataclass(frozen=True)
class FilterReport:
    kept: tuple[float, ...]
    removed: tuple[float, ...]
    q1: float
    q3: float
    iqr: float


def iqr_filter(values) -> FilterReport:
    """Drop values outside [Q1 - 1.5 IQR, Q3 + 1.5 IQR].

    Quartiles interpolate linearly between order statistics at rank
    p*(n-1); the fences themselves are kept.
    """
    vals = [float(v) for v in values]
    if len(vals) < 4:
        raise AnalysisError(f"need at least 4 values to filter, got {len(vals)}")
    q1 = float(np.percentile(vals, 25))
    q3 = float(np.percentile(vals, 75))
    iqr = q3 - q1
    lo, hi = q1 - 1.5 * iqr, q3 + 1.5 * iqr
    kept = tuple(v for v in vals if lo <= v <= hi)
    removed = tuple(v for v in vals if not lo <= v <= hi)
    return FilterReport(kept=kept, removed=removed, q1=q1, q3=q3, iqr=iqr)


# ---------------------------------------------------------------------------
# F distribution via the regularized incomplete beta function

def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta (modified Lentz)."""
    MAXIT, EPS, FPMIN = 500, 1e-12, 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < FPMIN:
        d = FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, MAXIT + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < FPMIN:
            d = FPMIN
        c = 1.0 + aa / c
        if abs(c) < FPMIN:
            c = FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < FPMIN:
            d = FPMIN
        c = 1.0 + aa / c
        if abs(c) < FPMIN:
            c = FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < EPS:
            return h
    raise AnalysisError(f"incomplete beta failed to converge for a={a}, b={b}, x={x}")


def betainc_reg(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b), relative accuracy ~1e-10."""
    if not 0.0 <= x <= 1.0:
        raise AnalysisError(f"x={x} outside [0, 1]")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    ln_bt = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        + a * math.log(x) + b * math.log1p(-x)
    )
    bt = math.exp(ln_bt)
    if x < (a + 1.0) / (a + b + 2.0):
        return bt * _betacf(a, b, x) / a
    return 1.0 - bt * _betacf(b, a, 1.0 - x) / b


def f_sf(f: float, df1: float, df2: float) -> float:
    """Survival function of the F distribution."""
    if f <= 0.0:
        return 1.0
    if math.isinf(f):
        return 0.0
    return betainc_reg(df2 / 2.0, df1 / 2.0, df2 / (df2 + df1 * f))


# ---------------------------------------------------------------------------
# one-way ANOVA / MANOVA

@dataclass(frozen=True)
class AnovaResult:
    f: float
    df_between: int
    df_within: int
    p: float
    partial_eta2: float


def anova_oneway(groups) -> AnovaResult:
    """One-way fixed-effects ANOVA over >= 2 groups of scalars."""
    arrs = [np.asarray(g, dtype=float) for g in groups]
    if len(arrs) < 2:
        raise AnalysisError("need at least 2 groups")
    if any(len(a) < 2 for a in arrs):
        raise AnalysisError("every group needs at least 2 values")
    n_total = sum(len(a) for a in arrs)
    grand = np.concatenate(arrs).mean()
    ss_between = sum(len(a) * (a.mean() - grand) ** 2 for a in arrs)
    ss_within = sum(((a - a.mean()) ** 2).sum() for a in arrs)
    df_b = len(arrs) - 1
    df_w = n_total - len(arrs)
    if ss_within == 0.0:
        if ss_between == 0.0:
            return AnovaResult(0.0, df_b, df_w, 1.0, 0.0)
        return AnovaResult(math.inf, df_b, df_w, 0.0, 1.0)
    f = (ss_between / df_b) / (ss_within / df_w)
    return AnovaResult(
        f=f,
        df_between=df_b,
        df_within=df_w,
        p=f_sf(f, df_b, df_w),
        partial_eta2=ss_between / (ss_between + ss_within),
    )


@dataclass(frozen=True)
class ManovaResult:
    wilks_lambda: float
    f_approx: float
    df1: float
    df2: float
    p: float
    partial_eta2: float


def manova_oneway(groups) -> ManovaResult:
    """One-way MANOVA: Wilks' lambda with Rao's F approximation.

    partial eta squared follows the 1 - lambda^(1/s) convention with
    s = min(n_variables, n_groups - 1).
    """
    arrs = [np.atleast_2d(np.asarray(g, dtype=float)) for g in groups]
    if len(arrs) < 2:
        raise AnalysisError("need at least 2 groups")
    p_vars = arrs[0].shape[1]
    if any(a.shape[1] != p_vars for a in arrs):
        raise AnalysisError("groups disagree on the number of variables")
    n_total = sum(len(a) for a in arrs)
    k = len(arrs)
    if n_total <= p_vars + k:
        raise AnalysisError(
            f"{n_total} observations cannot support {p_vars} variables over {k} groups"
        )
    grand = np.vstack(arrs).mean(axis=0)
    w = np.zeros((p_vars, p_vars))
    b = np.zeros((p_vars, p_vars))
    for a in arrs:
        m = a.mean(axis=0)
        c = a - m
        w += c.T @ c
        d = (m - grand)[:, None]
        b += len(a) * (d @ d.T)
    sign_w, logdet_w = np.linalg.slogdet(w)
    sign_t, logdet_t = np.linalg.slogdet(w + b)
    if sign_w <= 0 or not math.isfinite(logdet_w):
        raise SingularDataError(
            "within-group scatter is singular; drop collinear variables or add observations"
        )
    lam = float(np.exp(logdet_w - logdet_t)) if sign_t > 0 else 1.0
    lam = min(lam, 1.0)

    v_h = k - 1            # hypothesis df
    v_e = n_total - k      # error df
    s_eta = min(p_vars, v_h)
    denom = p_vars**2 + v_h**2 - 5
    t = math.sqrt((p_vars**2 * v_h**2 - 4.0) / denom) if denom > 0 else 1.0
    df1 = float(p_vars * v_h)
    df2 = (v_e + v_h - (p_vars + v_h + 1) / 2.0) * t - (p_vars * v_h - 2.0) / 2.0
    lam_t = lam ** (1.0 / t)
    f = ((1.0 - lam_t) / lam_t) * (df2 / df1) if lam_t > 0 else math.inf
    return ManovaResult(
        wilks_lambda=lam,
        f_approx=f,
        df1=df1,
        df2=df2,
        p=f_sf(f, df1, df2),
        partial_eta2=1.0 - lam ** (1.0 / s_eta),
    )


# ---------------------------------------------------------------------------
# post-hoc and correction

def posthoc_pairwise(groups, n_permutations: int = 999, seed: int = 0) -> dict:
    """Two-sided permutation tests on the mean difference for every pair.

    Returns {(i, j): p} with the usual (1 + hits) / (n + 1) Monte-Carlo
    estimate, so 1/(n_permutations + 1) is the resolution floor.
    """
    if len(groups) < 2:
        raise AnalysisError("need at least 2 groups")
    arrs = [np.asarray(g, dtype=float) for g in groups]
    rng = np.random.default_rng(seed)
    out = {}
    for i in range(len(arrs)):
        for j in range(i + 1, len(arrs)):
            a, b_ = arrs[i], arrs[j]
            obs = abs(a.mean() - b_.mean())
            pooled = np.concatenate([a, b_])
            na, n = len(a), len(pooled)
            perms = rng.permuted(
                np.broadcast_to(np.arange(n), (n_permutations, n)).copy(), axis=1
            )
            shuffled = pooled[perms]
            diffs = np.abs(
                shuffled[:, :na].mean(axis=1) - shuffled[:, na:].mean(axis=1)
            )
            hits = int((diffs >= obs - 1e-12).sum())
            out[(i, j)] = (1 + hits) / (n_permutations + 1)
    return out


@dataclass(frozen=True)
class BonferroniDecision:
    threshold: float
    reject: tuple[bool, ...]


def bonferroni(p_values, alpha: float) -> BonferroniDecision:
    """Per-test threshold alpha/m and the resulting decisions."""
    m = len(p_values)
    if m < 1:
        raise AnalysisError("need at least one p-value")
    threshold = alpha / m
    return BonferroniDecision(
        threshold=threshold,
        reject=tuple(p < threshold for p in p_values),
    )


# ---------------------------------------------------------------------------
# corpus report

@dataclass(frozen=True)
class ReportOptions:
    alpha: float = 0.05
    n_permutations: int = 999
    seed: int = 0


@dataclass
class ModeCell:
    mode: GuidanceMode
    n_kept: int
    n_removed: int
    mean: float
    sd: float
    better: tuple[str, ...] = ()   # modes with a significantly smaller mean


@dataclass
class MeasureRow:
    decade: int
    measure: str
    cells: dict
    anova: AnovaResult | None = None
    pairwise: dict | None = None


@dataclass
class DecadeBlock:
    decade: int
    manova: ManovaResult | None
    manova_note: str
    rows: list


@dataclass
class StatsReport:
    decades: list
    warnings: list

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(
            ["decade", "measure", "mode", "n_kept", "n_removed", "mean", "sd", "sig_better"]
        )
        for block in self.decades:
            for row in block.rows:
                for mode in MODES:
                    cell = row.cells[mode]
                    writer.writerow(
                        [
                            block.decade,
                            row.measure,
                            mode.value,
                            cell.n_kept,
                            cell.n_removed,
                            format(cell.mean, ".9g"),
                            format(cell.sd, ".9g"),
                            " ".join(cell.better),
                        ]
                    )
        return buf.getvalue()

    def to_text(self) -> str:
        lines = []
        for block in self.decades:
            lines.append(f"decade {block.decade}")
            if block.manova is not None:
                mv = block.manova
                lines.append(
                    f"  MANOVA: Wilks lambda={mv.wilks_lambda:.4f} "
                    f"F({mv.df1:.0f},{mv.df2:.1f})={mv.f_approx:.3f} "
                    f"p={mv.p:.4f} partial_eta2={mv.partial_eta2:.3f}"
                )
            else:
                lines.append(f"  MANOVA: {block.manova_note}")
            header = f"  {'measure':<8}" + "".join(f"{m.value:>26}" for m in MODES)
            lines.append(header)
            for row in block.rows:
                cells = []
                for mode in MODES:
                    c = row.cells[mode]
                    sup = f" [{','.join(c.better)}]" if c.better else ""
                    cells.append(f"{c.mean:10.2f} +-{c.sd:7.2f}{sup:<7}")
                lines.append(f"  {row.measure:<8}" + "".join(f"{c:>26}" for c in cells))
            lines.append("")
        for w in self.warnings:
            lines.append(f"warning: {w}")
        return "\n".join(lines) + "\n"


def report(sessions, options: ReportOptions = ReportOptions()) -> StatsReport:
    """Filtered descriptives plus gated significance marks per decade.

    The chain mirrors the usual workflow: a MANOVA across modes on the
    six-measure vectors gates per-measure ANOVAs at a Bonferroni-corrected
    threshold (alpha / 6), which in turn gate pairwise permutation tests;
    a mode is superscripted with every mode that beat it significantly.
    """
    if not sessions:
        raise AnalysisError("no sessions to analyze")
    warnings = []
    per_session = [(s, decade_metrics(s)) for s in sessions]
    decades_out = []
    for decade in (1, 2, 3):
        metrics_by_mode = {m: [] for m in MODES}
        for _, mets in per_session:
            dm = mets[decade - 1]
            metrics_by_mode[dm.mode].append(dm)
        counts = {m.value: len(v) for m, v in metrics_by_mode.items()}
        if any(c < 2 for c in counts.values()):
            warnings.append(
                f"decade {decade}: under-powered, sessions per mode {counts}; statistics skipped"
            )

        # per-measure IQR filtering (per decade x mode x measure group)
        kept_values = {}
        kept_mask = {}
        for mode in MODES:
            rows = metrics_by_mode[mode]
            for measure in MEASURES:
                vals = [dm.value(measure) for dm in rows]
                if len(vals) >= 4:
                    rep = iqr_filter(vals)
                    lo, hi = rep.q1 - 1.5 * rep.iqr, rep.q3 + 1.5 * rep.iqr
                    mask = [lo <= v <= hi for v in vals]
                else:
                    mask = [True] * len(vals)
                kept_values[(mode, measure)] = [v for v, k in zip(vals, mask) if k]
                kept_mask[(mode, measure)] = mask

        # MANOVA gate on complete cases (no measure filtered out)
        manova_res = None
        manova_note = ""
        gate_open = False
        groups_vec = []
        for mode in MODES:
            rows = metrics_by_mode[mode]
            vecs = []
            for idx, dm in enumerate(rows):
                if all(kept_mask[(mode, m)][idx] for m in MEASURES):
                    vecs.append(dm.vector())
            groups_vec.append(vecs)
        try:
            manova_res = manova_oneway(groups_vec)
            gate_open = manova_res.p < options.alpha
        except (AnalysisError, SingularDataError) as exc:
            manova_note = f"not computed ({exc})"
            warnings.append(f"decade {decade}: MANOVA gate closed: {exc}")

        rows_out = []
        for mi, measure in enumerate(MEASURES):
            cells = {}
            for mode in MODES:
                vals = kept_values[(mode, measure)]
                n_all = len(metrics_by_mode[mode])
                mean = float(np.mean(vals)) if vals else math.nan
                sd = float(np.std(vals, ddof=1)) if len(vals) > 1 else 0.0
                cells[mode] = ModeCell(
                    mode=mode,
                    n_kept=len(vals),
                    n_removed=n_all - len(vals),
                    mean=mean,
                    sd=sd,
                )
            row = MeasureRow(decade=decade, measure=measure, cells=cells)
            groups = [kept_values[(mode, measure)] for mode in MODES]
            enough = all(len(g) >= 2 for g in groups)
            if gate_open and enough:
                row.anova = anova_oneway(groups)
                if row.anova.p < options.alpha / len(MEASURES):
                    row.pairwise = posthoc_pairwise(
                        groups,
                        n_permutations=options.n_permutations,
                        seed=options.seed + 97 * decade + mi,
                    )
                    for (i, j), pval in row.pairwise.items():
                        if pval < options.alpha:
                            better, worse = (
                                (MODES[i], MODES[j])
                                if cells[MODES[i]].mean < cells[MODES[j]].mean
                                else (MODES[j], MODES[i])
                            )
                            cells[worse].better = tuple(
                                sorted(set(cells[worse].better) | {better.value})
                            )
            rows_out.append(row)
        decades_out.append(
            DecadeBlock(decade=decade, manova=manova_res, manova_note=manova_note, rows=rows_out)
        )
    return StatsReport(decades=decades_out, warnings=warnings)
