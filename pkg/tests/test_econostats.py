import math

import numpy as np
import pandas as pd
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special as sps

from edbnet.econostats import (
    REGRESSOR_SETS,
    CollinearityError,
    PanelAlignmentError,
    build_panel,
    fe_regression,
    kolmogorov_sf,
    ks_statistic,
    ks_two_sample,
)

from oracles import full_design, ks_bruteforce, lsdv, random_panel, sandwich_oracle



# --- Kolmogorov-Smirnov -----------------------------------------------------------------

@pytest.mark.parametrize("lam,p", [(1.224, 0.10), (1.358, 0.05), (1.628, 0.01), (1.949, 0.001)])
def test_kolmogorov_table(lam, p):
    assert kolmogorov_sf(lam) == pytest.approx(p, rel=0.01)


def test_kolmogorov_matches_scipy():
    for lam in np.concatenate([np.linspace(0.05, 3.5, 300), [1.17999, 1.18, 1.18001]]):
        assert kolmogorov_sf(lam) == pytest.approx(float(sps.kolmogorov(lam)), abs=1e-12)
    assert kolmogorov_sf(0.0) == 1.0 and kolmogorov_sf(-1.0) == 1.0


@settings(max_examples=100, deadline=None)
@given(a=st.lists(st.integers(0, 12), min_size=1, max_size=25),
       b=st.lists(st.integers(0, 12), min_size=1, max_size=25))
def test_ks_statistic_bruteforce(a, b):
    # integer support forces many ties
    assert ks_statistic(np.array(a) / 4, np.array(b) / 4) == pytest.approx(ks_bruteforce(np.array(a) / 4, np.array(b) / 4), abs=1e-15)


def test_ks_two_sample_pvalue():
    rng = np.random.default_rng(0)
    a, b = rng.random(300), rng.random(500) ** 1.3
    D, p = ks_two_sample(a, b)
    ne = 300 * 500 / 800
    assert p == pytest.approx(float(sps.kolmogorov(math.sqrt(ne) * D)), abs=1e-12)
    assert ks_two_sample(a, a) == (0.0, 1.0)
    with pytest.raises(ValueError):
        ks_statistic([], [1.0])


# --- fixed effects ------------------------------------------------------------------------

@pytest.mark.parametrize("seed", range(6))
def test_within_matches_dummy_variables(seed):
    panel = random_panel(seed)
    res = fe_regression(panel)
    X = full_design(panel)
    y = panel.data["y"].to_numpy()
    slopes, intercepts, codes = lsdv(y, X, panel.data["bank"])
    np.testing.assert_allclose(res.coef[:-1], slopes, rtol=1e-8, atol=1e-10)
    # eta is the observation-weighted mean bank intercept
    eta = np.bincount(codes, minlength=intercepts.size) @ intercepts / y.size
    assert res.coef[-1] == pytest.approx(eta, rel=1e-8)
    assert res.names[-1] == "eta" and res.names[-2] == "theta"


@pytest.mark.parametrize("seed,cluster", [(0, "bank"), (1, "bank"), (2, "quarter")])
def test_cluster_sandwich(seed, cluster):
    panel = random_panel(seed)
    res = fe_regression(panel, cluster=cluster)
    np.testing.assert_allclose(res.cov, sandwich_oracle(panel, cluster), rtol=1e-10, atol=1e-14)
    np.testing.assert_allclose(res.se, np.sqrt(np.diag(res.cov)), rtol=1e-14)


def test_recovers_known_coefficients():
    panel = random_panel(123, n_banks=400, unbalanced=False)
    res = fe_regression(panel)
    truth = {"alpha_betweenness": 1.0, "alpha_weighted_clustering": -0.5, "beta_betweenness": 0.3,
             "beta_out_strength": 0.1, "theta": 0.7}
    for name, v in truth.items():
        c, s = res.get(name)
        assert abs(c - v) < 4 * s


def test_r2_and_table():
    panel = random_panel(4)
    res = fe_regression(panel)
    assert 0 < res.adj_r2_within < res.r2_within < 1
    N, K = res.n_obs, len(res.names)
    assert res.adj_r2_within == pytest.approx(1 - (1 - res.r2_within) * (N - 1) / (N - K))
    text = res.format_table("Weighted")
    assert "alpha_betweenness" in text and "clustered by bank" in text
    d = res.as_dict()
    assert d["n_groups"] == 30 and d["obs_per_group"]["max"] <= 20
    assert set(d["stars"].values()) <= {"", "*", "**", "***"}


def test_time_dummies_absorb_theta():
    panel = random_panel(5)
    res = fe_regression(panel, time_effects="dummies")
    assert "theta" in res.dropped and "theta" not in res.names
    assert sum(n.startswith("quarter_") for n in res.names) == 19
    with pytest.raises(ValueError):
        fe_regression(panel, time_effects="bogus")


def test_bank_constant_regressor_dropped():
    panel = random_panel(6)
    panel.data["in_strength"] = panel.data["bank"].str[1:].astype(float)
    res = fe_regression(panel)
    assert "alpha_in_strength" in res.dropped
    assert "alpha_in_strength" not in res.names


def test_collinear_regressors_raise():
    panel = random_panel(7)
    panel.data["out_strength"] = 2 * panel.data["betweenness"] - panel.data["in_strength"]
    with pytest.raises(CollinearityError):
        fe_regression(panel)


# --- panel assembly -----------------------------------------------------------------------

def long_inputs():
    rows, freq, core = [], [], []
    for q in ("2008Q3", "2008Q4", "2009Q1"):
        for b in ("A", "B", "C"):
            for m, v in (("coreness", 0.0), ("binary_clustering", 0.2), ("in_degree", 3),
                         ("out_degree", 2), ("betweenness", 0.1)):
                if m != "coreness":
                    rows.append((q, b, m, v))
            freq.append((q, b, 0.25))
            core.append((q, b, 1.0 if b == "A" else 0.0))
    return (pd.DataFrame(rows, columns=["quarter", "bank", "metric", "value"]),
            pd.DataFrame(freq, columns=["quarter", "bank", "default_frequency"]),
            pd.DataFrame(core, columns=["quarter", "bank", "coreness"]))


def test_build_panel():
    m, f, c = long_inputs()
    panel = build_panel(m, f, c, "binary")
    df = panel.data
    assert list(df.columns) == ["bank", "quarter", "y", "theta", *REGRESSOR_SETS["binary"]]
    assert df["y"].eq(25.0).all() and panel.y_unit == "percent"
    assert df["theta"].tolist() == [0, 1, 1] * 3
    assert df["bank"].tolist() == ["A"] * 3 + ["B"] * 3 + ["C"] * 3
    assert build_panel(m, f, c, percent=False).data["y"].eq(0.25).all()


def test_build_panel_reports_orphans():
    m, f, c = long_inputs()
    f = f.iloc[1:]
    with pytest.raises(PanelAlignmentError, match="2008Q3/A"):
        build_panel(m, f, c)
    m2, f2, c2 = long_inputs()
    with pytest.raises(ValueError):
        build_panel(m2, f2, None, "binary")
    with pytest.raises(PanelAlignmentError, match="regressors"):
        build_panel(m2, f2, c2, "weighted")
