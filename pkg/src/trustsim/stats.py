"""Inference protocol: mixed two-way ANOVA, Bonferroni post-hoc, paired and
pooled t-tests, Mann-Whitney U, multiple linear regression.

Tail probabilities for t and F come from the regularized incomplete beta
function; the Mann-Whitney p is exact by enumeration for small tie-free
samples and a tie-corrected, continuity-corrected normal approximation
otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special


class StatsError(ValueError):
    pass


class DegenerateDesignError(StatsError):
    pass


class DegenerateDataError(StatsError):
    pass


class SingularDesignError(StatsError):
    pass


# ---------------------------------------------------------------------------
# distribution tails


def t_sf_two_sided(t: float, df: float) -> float:
    """P(|T_df| >= t)."""
    if df <= 0:
        raise StatsError("df must be > 0")
    t = abs(float(t))
    if math.isinf(t):
        return 0.0
    return float(special.betainc(df / 2.0, 0.5, df / (df + t * t)))


def f_sf(f: float, df1: float, df2: float) -> float:
    """P(F_{df1,df2} >= f)."""
    if df1 <= 0 or df2 <= 0:
        raise StatsError("degrees of freedom must be > 0")
    if f <= 0:
        return 1.0
    if math.isinf(f):
        return 0.0
    return float(special.betainc(df2 / 2.0, df1 / 2.0, df2 / (df2 + df1 * f)))


def norm_sf_two_sided(z: float) -> float:
    return float(special.erfc(abs(z) / math.sqrt(2.0)))


# ---------------------------------------------------------------------------
# result containers


@dataclass(frozen=True)
class TestResult:
    statistic: float
    p: float
    n: tuple[int, ...]
    method: str
    df: float | None = None


@dataclass(frozen=True)
class EffectResult:
    F: float
    df_num: int
    df_den: int
    p: float


@dataclass(frozen=True)
class AnovaResult:
    between: EffectResult
    within: EffectResult
    interaction: EffectResult
    between_label: str = "group"
    within_label: str = "condition"

    def effect(self, name: str) -> EffectResult:
        return {"between": self.between, "within": self.within,
                "interaction": self.interaction}[name]


@dataclass(frozen=True)
class PairwiseResult:
    family: str
    label: str
    statistic: float
    df: float
    p_raw: float
    p_adj: float
    n: tuple[int, ...]


# ---------------------------------------------------------------------------
# mixed (split-plot) design


class MixedDesignTable:
    """One between-subjects factor crossed with one within-subjects factor.

    Built from long-format rows (subject, group, level, value); subjects
    missing any within level are dropped (complete-case) and recorded in
    ``dropped_subjects``.
    """

    def __init__(self, subjects, groups, levels, values, dropped=()):
        self.subjects = list(subjects)
        self.groups = list(groups)
        self.levels = list(levels)
        self.values = np.asarray(values, dtype=np.float64)
        self.dropped_subjects = tuple(dropped)
        if self.values.shape != (len(self.subjects), len(self.levels)):
            raise StatsError("values must be (n_subjects, n_levels)")

    @classmethod
    def from_rows(cls, rows) -> "MixedDesignTable":
        by_subject: dict[str, dict[str, float]] = {}
        group_of: dict[str, str] = {}
        levels: list[str] = []
        for subject, group, level, value in rows:
            subject, group, level = str(subject), str(group), str(level)
            if subject in group_of and group_of[subject] != group:
                raise StatsError(f"subject {subject} appears in two groups")
            group_of[subject] = group
            cell = by_subject.setdefault(subject, {})
            if level in cell:
                raise StatsError(f"duplicate (subject, level) cell: ({subject}, {level})")
            cell[level] = float(value)
            if level not in levels:
                levels.append(level)
        subjects, groups, data, dropped = [], [], [], []
        for subject in by_subject:
            cell = by_subject[subject]
            if any(level not in cell for level in levels):
                dropped.append(subject)
                continue
            subjects.append(subject)
            groups.append(group_of[subject])
            data.append([cell[level] for level in levels])
        return cls(subjects, groups, levels, np.array(data, dtype=np.float64), tuple(dropped))

    @property
    def balanced(self) -> bool:
        counts = [self.groups.count(g) for g in self.group_levels()]
        return len(set(counts)) <= 1

    def group_levels(self) -> list[str]:
        seen = []
        for g in self.groups:
            if g not in seen:
                seen.append(g)
        return seen


def _effect(ss: float, df_num: int, ms_err: float, df_den: int) -> EffectResult:
    if df_num <= 0 or df_den <= 0:
        raise DegenerateDesignError("not enough degrees of freedom")
    ms = ss / df_num
    if ss <= 0.0:
        return EffectResult(F=0.0, df_num=df_num, df_den=df_den, p=1.0)
    if ms_err == 0.0:
        return EffectResult(F=math.inf, df_num=df_num, df_den=df_den, p=0.0)
    f = ms / ms_err
    return EffectResult(F=f, df_num=df_num, df_den=df_den, p=f_sf(f, df_num, df_den))


def mixed_anova(table: MixedDesignTable,
                between_label: str = "group",
                within_label: str = "condition") -> AnovaResult:
    """Split-plot sums-of-squares decomposition.

    Between effect is tested against subjects-within-groups; the within
    effect and interaction against the within-subjects residual. Group
    sizes may differ (complete cases keep the cell counts proportional,
    so the weighted decomposition stays orthogonal).
    """
    groups = table.group_levels()
    if len(groups) < 2:
        raise DegenerateDesignError("between factor needs at least two levels")
    b = len(table.levels)
    if b < 2:
        raise DegenerateDesignError("within factor needs at least two levels")
    group_idx = {g: np.array([i for i, gg in enumerate(table.groups) if gg == g])
                 for g in groups}
    for g, idx in group_idx.items():
        if len(idx) < 2:
            raise DegenerateDesignError(f"group {g!r} has fewer than two subjects")

    y = table.values
    n_subj = y.shape[0]
    grand = float(np.mean(y))

    subj_means = y.mean(axis=1)
    level_means = y.mean(axis=0)
    ss_total = float(np.sum((y - grand) ** 2))
    ss_between_subj = b * float(np.sum((subj_means - grand) ** 2))

    ss_a = 0.0
    ss_ab = 0.0
    for g, idx in group_idx.items():
        n_g = len(idx)
        gmean = float(np.mean(y[idx]))
        ss_a += b * n_g * (gmean - grand) ** 2
        cell_means = y[idx].mean(axis=0)
        ss_ab += n_g * float(np.sum((cell_means - gmean - level_means + grand) ** 2))
    ss_subj_within = ss_between_subj - ss_a
    ss_b = n_subj * float(np.sum((level_means - grand) ** 2))
    ss_err = ss_total - ss_between_subj - ss_b - ss_ab

    a = len(groups)
    df_a, df_sw = a - 1, n_subj - a
    df_b, df_ab = b - 1, (a - 1) * (b - 1)
    df_err = (n_subj - a) * (b - 1)

    ms_sw = ss_subj_within / df_sw if df_sw > 0 else 0.0
    ms_err = ss_err / df_err if df_err > 0 else 0.0
    return AnovaResult(
        between=_effect(ss_a, df_a, ms_sw, df_sw),
        within=_effect(ss_b, df_b, ms_err, df_err),
        interaction=_effect(max(ss_ab, 0.0), df_ab, ms_err, df_err),
        between_label=between_label, within_label=within_label)


# ---------------------------------------------------------------------------
# t-tests


def paired_ttest(pre, post) -> TestResult:
    pre = np.asarray(pre, dtype=np.float64)
    post = np.asarray(post, dtype=np.float64)
    if pre.shape != post.shape:
        raise StatsError("paired samples must have equal length")
    n = len(pre)
    if n < 2:
        raise StatsError("need at least two pairs")
    d = post - pre
    sd = float(np.std(d, ddof=1))
    if sd == 0.0:
        raise DegenerateDataError("all paired differences are identical")
    t = float(np.mean(d)) / (sd / math.sqrt(n))
    return TestResult(statistic=t, p=t_sf_two_sided(t, n - 1), n=(n,),
                      method="paired-t", df=n - 1)


def independent_ttest(a, b) -> TestResult:
    """Pooled-variance two-sample t (classic post-hoc between-groups test)."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    na, nb = len(a), len(b)
    if na < 2 or nb < 2:
        raise StatsError("need at least two observations per group")
    va, vb = np.var(a, ddof=1), np.var(b, ddof=1)
    df = na + nb - 2
    sp2 = ((na - 1) * va + (nb - 1) * vb) / df
    if sp2 == 0.0:
        raise DegenerateDataError("zero pooled variance")
    t = (float(np.mean(a)) - float(np.mean(b))) / math.sqrt(sp2 * (1.0 / na + 1.0 / nb))
    return TestResult(statistic=t, p=t_sf_two_sided(t, df), n=(na, nb),
                      method="independent-t", df=df)


# ---------------------------------------------------------------------------
# Bonferroni post-hoc


def bonferroni_posthoc(table: MixedDesignTable, effect: str) -> list[PairwiseResult]:
    """Pairwise comparisons for a main effect, Bonferroni-adjusted per family.

    ``between``: groups compared within each within-level (independent t,
    family size = number of levels for two groups).
    ``within``: level pairs compared within each group (paired t, family
    size = number of pairs per group).
    """
    y = table.values
    groups = table.group_levels()
    out: list[PairwiseResult] = []
    if effect == "between":
        pairs = [(ga, gb) for i, ga in enumerate(groups) for gb in groups[i + 1:]]
        m = len(pairs) * len(table.levels)
        for j, level in enumerate(table.levels):
            for ga, gb in pairs:
                ia = [i for i, g in enumerate(table.groups) if g == ga]
                ib = [i for i, g in enumerate(table.groups) if g == gb]
                res = independent_ttest(y[ia, j], y[ib, j])
                out.append(PairwiseResult(
                    family="between", label=f"{level}: {ga} vs {gb}",
                    statistic=res.statistic, df=res.df, p_raw=res.p,
                    p_adj=min(1.0, m * res.p), n=res.n))
        return out
    if effect == "within":
        level_pairs = [(i, j) for i in range(len(table.levels))
                       for j in range(i + 1, len(table.levels))]
        m = len(level_pairs)
        for g in groups:
            idx = [i for i, gg in enumerate(table.groups) if gg == g]
            for i, j in level_pairs:
                res = paired_ttest(y[idx, i], y[idx, j])
                out.append(PairwiseResult(
                    family=f"within:{g}",
                    label=f"{g}: {table.levels[i]} vs {table.levels[j]}",
                    statistic=res.statistic, df=res.df, p_raw=res.p,
                    p_adj=min(1.0, m * res.p), n=res.n))
        return out
    raise StatsError(f"effect must be 'between' or 'within', got {effect!r}")


# ---------------------------------------------------------------------------
# Mann-Whitney U


def _midranks(pooled: np.ndarray) -> np.ndarray:
    order = np.argsort(pooled, kind="mergesort")
    ranks = np.empty(len(pooled))
    i = 0
    while i < len(pooled):
        j = i
        while j + 1 < len(pooled) and pooled[order[j + 1]] == pooled[order[i]]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


@lru_cache(maxsize=None)
def _u_counts(n1: int, n2: int) -> tuple[int, ...]:
    """Null distribution of U (counts over 0..n1*n2), tie-free ranks."""
    if n1 == 0 or n2 == 0:
        return (1,)
    prev_a = _u_counts(n1 - 1, n2)   # last pooled rank assigned to sample 1
    prev_b = _u_counts(n1, n2 - 1)   # ... to sample 2
    size = n1 * n2 + 1
    out = [0] * size
    # assigning the largest rank to sample 1 adds n2 to U1
    for u, c in enumerate(prev_a):
        out[u + n2] += c
    for u, c in enumerate(prev_b):
        out[u] += c
    return tuple(out)


def mann_whitney_u(a, b) -> TestResult:
    """Two-tailed Mann-Whitney U with midrank ties.

    Exact enumeration when n1*n2 <= 64 without ties; otherwise a normal
    approximation with tie correction and continuity correction.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    n1, n2 = len(a), len(b)
    if n1 < 1 or n2 < 1:
        raise StatsError("both samples must be non-empty")
    pooled = np.concatenate([a, b])
    ranks = _midranks(pooled)
    r1 = float(np.sum(ranks[:n1]))
    u1 = r1 - n1 * (n1 + 1) / 2.0
    u2 = n1 * n2 - u1
    u = min(u1, u2)

    _, tie_counts = np.unique(pooled, return_counts=True)
    has_ties = bool(np.any(tie_counts > 1))

    if n1 * n2 <= 64 and not has_ties:
        counts = _u_counts(n1, n2)
        total = math.comb(n1 + n2, n1)
        cum = sum(counts[:int(u) + 1])
        p = min(1.0, 2.0 * cum / total)
        return TestResult(statistic=u, p=p, n=(n1, n2), method="mann-whitney-exact")

    n = n1 + n2
    mu = n1 * n2 / 2.0
    tie_term = float(np.sum(tie_counts ** 3 - tie_counts)) / (n * (n - 1)) if n > 1 else 0.0
    var = n1 * n2 / 12.0 * ((n + 1) - tie_term)
    if var <= 0:
        return TestResult(statistic=u, p=1.0, n=(n1, n2), method="mann-whitney-normal")
    z = max(abs(u - mu) - 0.5, 0.0) / math.sqrt(var)
    return TestResult(statistic=u, p=min(1.0, norm_sf_two_sided(z)), n=(n1, n2),
                      method="mann-whitney-normal")


# ---------------------------------------------------------------------------
# multiple linear regression


@dataclass(frozen=True)
class RegressionResult:
    coefficients: np.ndarray       # intercept first
    std_errors: np.ndarray
    coef_p: np.ndarray
    r_squared: float
    adj_r_squared: float
    f_statistic: float
    df_model: int
    df_resid: int
    p: float
    residuals: np.ndarray


def linear_regression(x, y) -> RegressionResult:
    """Ordinary least squares with an intercept; overall F and adjusted R²."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    y = np.asarray(y, dtype=np.float64)
    n, p = x.shape
    if n <= p + 1:
        raise StatsError(f"need more rows ({n}) than fitted parameters ({p + 1})")
    design = np.column_stack([np.ones(n), x])
    if np.linalg.matrix_rank(design) < p + 1:
        raise SingularDesignError("predictor matrix is rank deficient")
    beta, *_ = np.linalg.lstsq(design, y, rcond=None)
    fitted = design @ beta
    resid = y - fitted
    sse = float(np.sum(resid ** 2))
    sst = float(np.sum((y - np.mean(y)) ** 2))
    if sst == 0.0:
        raise DegenerateDataError("response has zero variance")
    df_model, df_resid = p, n - p - 1
    r2 = 1.0 - sse / sst
    adj = 1.0 - (1.0 - r2) * (n - 1) / (n - p - 1)
    ssr = sst - sse
    if sse == 0.0:
        f = math.inf
        p_overall = 0.0
    else:
        f = (ssr / df_model) / (sse / df_resid)
        p_overall = f_sf(f, df_model, df_resid)
    sigma2 = sse / df_resid if df_resid > 0 else 0.0
    cov = sigma2 * np.linalg.inv(design.T @ design)
    se = np.sqrt(np.diag(cov))
    with np.errstate(divide="ignore", invalid="ignore"):
        tvals = np.where(se > 0, beta / se, np.inf)
    coef_p = np.array([t_sf_two_sided(t, df_resid) for t in tvals])
    return RegressionResult(coefficients=beta, std_errors=se, coef_p=coef_p,
                            r_squared=r2, adj_r_squared=adj, f_statistic=f,
                            df_model=df_model, df_resid=df_resid, p=p_overall,
                            residuals=resid)
