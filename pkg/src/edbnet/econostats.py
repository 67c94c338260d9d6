"""Two-sample KS test and fixed-effects panel regression of bank risk on network features.

The panel model regresses a bank's default frequency on its features, their
interaction with a post-crisis dummy ``theta`` and the dummy itself, with
bank fixed effects removed by the within transformation and standard errors
clustered by bank.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .netcore import parse_quarter

REGRESSOR_SETS = {
    "binary": ("coreness", "binary_clustering", "in_degree", "out_degree"),
    "weighted": ("betweenness", "weighted_clustering", "in_strength", "out_strength"),
}
STAR_THRESHOLDS = (0.05, 0.01, 0.001)
DEFAULT_CRISIS_QUARTER = "2008Q4"


class CollinearityError(ValueError):
    pass


class PanelAlignmentError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Kolmogorov-Smirnov

def kolmogorov_sf(lam: float) -> float:
    """Survival function ``P(K > lam)`` of the Kolmogorov distribution."""
    if lam <= 0:
        return 1.0
    if lam < 1.18:
        # Jacobi-theta form converges fast for small arguments
        y = math.exp(-(math.pi**2) / (8.0 * lam * lam))
        s = sum(y ** ((2 * k - 1) ** 2) for k in range(1, 8))
        return float(min(1.0, max(0.0, 1.0 - math.sqrt(2.0 * math.pi) / lam * s)))
    s = 0.0
    for k in range(1, 101):
        term = (-1) ** (k - 1) * math.exp(-2.0 * k * k * lam * lam)
        s += term
        if abs(term) < 1e-17:
            break
    return float(min(1.0, max(0.0, 2.0 * s)))


def ks_statistic(sample_a, sample_b) -> float:
    """``sup_x |F_a(x) - F_b(x)|`` with right-continuous empirical CDFs."""
    a = np.sort(np.asarray(sample_a, dtype=float))
    b = np.sort(np.asarray(sample_b, dtype=float))
    if a.size == 0 or b.size == 0:
        raise ValueError("KS test needs two nonempty samples")
    grid = np.concatenate([a, b])
    fa = np.searchsorted(a, grid, side="right") / a.size
    fb = np.searchsorted(b, grid, side="right") / b.size
    return float(np.max(np.abs(fa - fb)))


def ks_two_sample(sample_a, sample_b) -> tuple[float, float]:
    """KS statistic and asymptotic p-value with effective size ``n_a n_b / (n_a + n_b)``."""
    D = ks_statistic(sample_a, sample_b)
    na, nb = np.size(sample_a), np.size(sample_b)
    ne = na * nb / (na + nb)
    return D, kolmogorov_sf(math.sqrt(ne) * D)


# ---------------------------------------------------------------------------
# panel construction

@dataclass
class PanelDataset:
    data: pd.DataFrame  # columns: bank, quarter, y, theta, <regressors>
    regressors: tuple[str, ...]
    regressor_set: str
    crisis_quarter: str
    y_unit: str = "percent"

    @property
    def n_obs(self) -> int:
        return len(self.data)


def crisis_dummy(quarters, crisis_quarter: str = DEFAULT_CRISIS_QUARTER) -> np.ndarray:
    cut = parse_quarter(crisis_quarter)
    return np.array([1 if parse_quarter(q) >= cut else 0 for q in quarters], dtype=np.int64)


def build_panel(
    metrics_long: pd.DataFrame,
    frequencies: pd.DataFrame,
    coreness: pd.DataFrame | None = None,
    regressor_set: str = "binary",
    crisis_quarter: str = DEFAULT_CRISIS_QUARTER,
    percent: bool = True,
) -> PanelDataset:
    """Join per-bank features and simulated default frequencies into a long panel.

    Parameters
    ----------
    metrics_long : DataFrame
        Columns ``quarter, bank, metric, value``.
    frequencies : DataFrame
        Columns ``quarter, bank, default_frequency`` (fraction in [0, 1]).
    coreness : DataFrame, optional
        Columns ``quarter, bank, coreness``; required for the binary set.
    percent : bool
        Express the dependent variable in percent.

    Banks missing from a quarter simply have no row there. A (quarter, bank)
    pair present in one input but not another raises
    :class:`PanelAlignmentError` listing the orphans.
    """
    if regressor_set not in REGRESSOR_SETS:
        raise ValueError(f"unknown regressor set {regressor_set!r}")
    names = REGRESSOR_SETS[regressor_set]
    key = ["quarter", "bank"]

    m = metrics_long.astype({"quarter": str, "bank": str})
    wide = m.pivot_table(index=key, columns="metric", values="value", aggfunc="first").reset_index()
    wide.columns.name = None
    tables = {"metrics": wide}
    if "coreness" in names:
        if coreness is None:
            raise ValueError("binary regressor set needs coreness input")
        tables["coreness"] = coreness.astype({"quarter": str, "bank": str})[key + ["coreness"]]
    f = frequencies.astype({"quarter": str, "bank": str})[key + ["default_frequency"]]
    tables["frequencies"] = f

    keysets = {name: set(map(tuple, t[key].to_numpy())) for name, t in tables.items()}
    common = set.intersection(*keysets.values())
    if not common:
        raise PanelAlignmentError("inputs share no (quarter, bank) observations")
    orphans = sorted(set.union(*keysets.values()) - common)
    if orphans:
        shown = ", ".join(f"{q}/{b}" for q, b in orphans[:20])
        more = "" if len(orphans) <= 20 else f" (+{len(orphans) - 20} more)"
        raise PanelAlignmentError(f"misaligned observations: {shown}{more}")

    missing = [c for c in names if c != "coreness" and c not in wide.columns]
    if missing:
        raise PanelAlignmentError(f"metrics input lacks regressors {missing}")

    df = f.merge(wide, on=key)
    if "coreness" in tables:
        df = df.merge(tables["coreness"], on=key)
    df = df.rename(columns={"default_frequency": "y"})
    if percent:
        df["y"] = 100.0 * df["y"]
    df["theta"] = crisis_dummy(df["quarter"], crisis_quarter)
    df = df[["bank", "quarter", "y", "theta", *names]]
    order = np.lexsort((df["quarter"].map(parse_quarter).to_numpy(), df["bank"].to_numpy()))
    df = df.iloc[order].reset_index(drop=True)
    return PanelDataset(df, names, regressor_set, crisis_quarter, "percent" if percent else "fraction")


# ---------------------------------------------------------------------------
# fixed-effects estimation

@dataclass
class RegressionResult:
    names: list[str]
    coef: np.ndarray
    se: np.ndarray
    cov: np.ndarray = field(repr=False)
    n_obs: int = 0
    n_groups: int = 0
    group_sizes: dict[str, int] = field(default_factory=dict, repr=False)
    r2_within: float = float("nan")
    adj_r2_within: float = float("nan")
    dropped: list[str] = field(default_factory=list)
    time_effects: str = "const"
    cluster: str = "bank"
    y_unit: str = "percent"
    small_sample_factor: float = float("nan")

    @property
    def t_stats(self) -> np.ndarray:
        return self.coef / self.se

    @property
    def p_values(self) -> np.ndarray:
        return np.array([math.erfc(abs(t) / math.sqrt(2.0)) for t in self.t_stats])

    def stars(self) -> list[str]:
        out = []
        for p in self.p_values:
            out.append("*" * sum(p < thr for thr in STAR_THRESHOLDS))
        return out

    def get(self, name: str) -> tuple[float, float]:
        k = self.names.index(name)
        return float(self.coef[k]), float(self.se[k])

    def as_dict(self) -> dict:
        return {
            "coefficients": {n: float(c) for n, c in zip(self.names, self.coef)},
            "std_errors": {n: float(s) for n, s in zip(self.names, self.se)},
            "p_values": {n: float(p) for n, p in zip(self.names, self.p_values)},
            "stars": dict(zip(self.names, self.stars())),
            "n_obs": self.n_obs,
            "n_groups": self.n_groups,
            "obs_per_group": {"min": min(self.group_sizes.values()), "max": max(self.group_sizes.values()),
                              "mean": self.n_obs / self.n_groups},
            "r2_within": self.r2_within,
            "adj_r2_within": self.adj_r2_within,
            "dropped": self.dropped,
            "time_effects": self.time_effects,
            "cluster": self.cluster,
            "y_unit": self.y_unit,
            "small_sample_factor": self.small_sample_factor,
            "star_thresholds": list(STAR_THRESHOLDS),
        }

    def format_table(self, title: str = "") -> str:
        """Aligned text table: coefficient with stars, SE in parentheses below."""
        label_w = max(len(n) for n in self.names) + 2
        lines = []
        if title:
            lines.append(title)
        lines.append("=" * (label_w + 16))
        for name, c, s, st in zip(self.names, self.coef, self.se, self.stars()):
            lines.append(f"{name:<{label_w}}{c:>10.3f}{st:<4}")
            lines.append(f"{'':<{label_w}}{'(' + format(s, '.3f') + ')':>10}")
        lines.append("-" * (label_w + 16))
        lines.append(f"{'N':<{label_w}}{self.n_obs:>10d}")
        lines.append(f"{'groups':<{label_w}}{self.n_groups:>10d}")
        lines.append(f"{'adj. R2':<{label_w}}{self.adj_r2_within:>10.3f}")
        lines.append("=" * (label_w + 16))
        lines.append("Standard errors in parentheses, clustered by " + self.cluster)
        lines.append("* p<0.05, ** p<0.01, *** p<0.001")
        if self.dropped:
            lines.append("dropped (absorbed or collinear): " + ", ".join(self.dropped))
        return "\n".join(lines)


def _demean(values: np.ndarray, codes: np.ndarray, n_groups: int) -> np.ndarray:
    counts = np.bincount(codes, minlength=n_groups).astype(float)
    if values.ndim == 1:
        means = np.bincount(codes, weights=values, minlength=n_groups) / counts
        return values - means[codes]
    out = np.empty_like(values)
    for k in range(values.shape[1]):
        means = np.bincount(codes, weights=values[:, k], minlength=n_groups) / counts
        out[:, k] = values[:, k] - means[codes]
    return out


def design_matrix(panel: PanelDataset, time_effects: str = "const") -> tuple[np.ndarray, list[str]]:
    """Regressors, their crisis interactions, the crisis dummy and optional quarter dummies."""
    df = panel.data
    X = [df[m].to_numpy(float) for m in panel.regressors]
    names = [f"alpha_{m}" for m in panel.regressors]
    theta = df["theta"].to_numpy(float)
    X += [theta * df[m].to_numpy(float) for m in panel.regressors]
    names += [f"beta_{m}" for m in panel.regressors]
    X.append(theta)
    names.append("theta")
    if time_effects == "dummies":
        quarters = sorted(df["quarter"].unique(), key=parse_quarter)
        for q in quarters[1:]:
            X.append((df["quarter"] == q).to_numpy(float))
            names.append(f"quarter_{q}")
    elif time_effects != "const":
        raise ValueError(f"time_effects must be 'const' or 'dummies', got {time_effects!r}")
    return np.column_stack(X), names


def fe_regression(
    panel: PanelDataset,
    time_effects: str = "const",
    cluster: str = "bank",
    rank_tol: float = 1e-10,
) -> RegressionResult:
    """Within-group OLS with cluster-robust standard errors.

    Variables are demeaned by bank and the grand mean added back, so the
    constant ``eta`` equals the average absorbed bank effect. The covariance
    is the sandwich ``c (X'X)^-1 (sum_g X_g' e_g e_g' X_g) (X'X)^-1`` with
    ``c = G/(G-1) * (N-1)/(N-K)``, where ``K`` counts the estimated
    coefficients including ``eta``.

    Regressors that are constant within every bank are absorbed by the fixed
    effects and reported in ``dropped``; with ``time_effects='dummies'`` the
    crisis dummy is absorbed by the quarter dummies and dropped the same way.
    Any remaining rank deficiency raises :class:`CollinearityError`.
    """
    df = panel.data
    banks = df["bank"].to_numpy()
    _, codes = np.unique(banks, return_inverse=True)
    G = int(codes.max()) + 1
    if G < 2:
        raise ValueError("fixed-effects regression needs at least 2 banks")
    if cluster == "bank":
        cl_codes = codes
    elif cluster == "quarter":
        _, cl_codes = np.unique(df["quarter"].to_numpy(), return_inverse=True)
    else:
        raise ValueError(f"cluster must be 'bank' or 'quarter', got {cluster!r}")

    X, names = design_matrix(panel, time_effects)
    y = df["y"].to_numpy(float)
    N = y.size

    Xw = _demean(X, codes, G)
    yw = _demean(y, codes, G)

    dropped = []
    keep = []
    for k, name in enumerate(names):
        scale = max(1.0, float(np.max(np.abs(X[:, k]))))
        if np.max(np.abs(Xw[:, k])) <= rank_tol * scale:
            dropped.append(name)
        else:
            keep.append(k)
    if time_effects == "dummies" and "theta" in names:
        k_theta = names.index("theta")
        if k_theta in keep:
            keep.remove(k_theta)
            dropped.append("theta")

    Xw = Xw[:, keep]
    kept = [names[k] for k in keep]

    # collinearity among the remaining demeaned columns
    if Xw.shape[1]:
        scales = np.linalg.norm(Xw, axis=0)
        _, R = np.linalg.qr(Xw / scales)
        diag = np.abs(np.diag(R))
        bad = [kept[i] for i in np.flatnonzero(diag < 1e-9)]
        if bad:
            raise CollinearityError(f"collinear regressors after within transform: {', '.join(bad)}")

    # add grand means back and append the constant
    Xt = np.column_stack([Xw + X[:, keep].mean(axis=0), np.ones(N)])
    yt = yw + y.mean()
    names_out = kept + ["eta"]
    K = Xt.shape[1]
    if N <= K:
        raise ValueError("not enough observations for the number of regressors")

    Qm, Rm = np.linalg.qr(Xt)
    coef = np.linalg.solve(Rm, Qm.T @ yt)
    resid = yt - Xt @ coef

    XtX_inv = np.linalg.inv(Rm.T @ Rm)
    n_cl = int(cl_codes.max()) + 1
    scores = np.zeros((n_cl, K))
    np.add.at(scores, cl_codes, Xt * resid[:, None])
    meat = scores.T @ scores
    c = n_cl / (n_cl - 1) * (N - 1) / (N - K)
    cov = c * XtX_inv @ meat @ XtX_inv
    cov = 0.5 * (cov + cov.T)
    se = np.sqrt(np.clip(np.diag(cov), 0.0, None))

    ssr = float(resid @ resid)
    sst = float(yw @ yw)
    r2 = 1.0 - ssr / sst if sst > 0 else float("nan")
    adj = 1.0 - (1.0 - r2) * (N - 1) / (N - K) if sst > 0 else float("nan")

    sizes = pd.Series(banks).value_counts()
    return RegressionResult(
        names=names_out, coef=coef, se=se, cov=cov, n_obs=N, n_groups=G,
        group_sizes={str(k): int(v) for k, v in sizes.items()},
        r2_within=r2, adj_r2_within=adj, dropped=dropped,
        time_effects=time_effects, cluster=cluster, y_unit=panel.y_unit,
        small_sample_factor=c,
    )
