
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from edbnet.coreperiphery import block_summary, cp_error, fit_core_periphery
from edbnet.netcore import QuarterlyNetwork

from oracles import all_partitions, best_by_enumeration, noisy_cp, perfect_cp, score_oracle


# --- error score -----------------------------------------------------------------

def test_perfect_graph_scores_zero():
    A, core = perfect_cp(np.random.default_rng(0), 9, 3)
    assert cp_error(A, core) == 0


def test_complete_graph_counts_periphery_links():
    n = 6
    A = np.ones((n, n), dtype=bool)
    np.fill_diagonal(A, False)
    for core in [(0,), (0, 1), (2, 4, 5), (0, 1, 2, 3, 4)]:
        m = n - len(core)
        assert cp_error(A, core) == m * (m - 1)


def test_single_missing_core_link():
    A, core = perfect_cp(np.random.default_rng(1), 8, 3)
    A[core[0], core[1]] = False
    assert cp_error(A, core) == 1


def test_mask_and_index_forms_agree():
    A, core = perfect_cp(np.random.default_rng(2), 7, 3)
    mask = np.zeros(7, dtype=bool)
    mask[list(core)] = True
    assert cp_error(A, mask) == cp_error(A, core) == cp_error(A, set(core))


@pytest.mark.parametrize("core", [(), tuple(range(5)), (7,)])
def test_invalid_core_rejected(core):
    A = np.ones((5, 5)) - np.eye(5)
    with pytest.raises(ValueError):
        cp_error(A, core)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 9), p=st.floats(0, 1), data=st.data())
def test_score_matches_loop_oracle(seed, n, p, data):
    rng = np.random.default_rng(seed)
    A = rng.random((n, n)) < p
    np.fill_diagonal(A, False)
    size = data.draw(st.integers(1, n - 1))
    core = tuple(sorted(rng.choice(n, size, replace=False).tolist()))
    assert cp_error(A, core) == score_oracle(A, core)


# --- fitting ------------------------------------------------------------------------

@pytest.mark.parametrize("seed", range(10))
def test_planted_perfect_core_is_unique_optimum(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(6, 13))
    A, core = perfect_cp(rng, n, int(rng.integers(2, n // 2 + 1)))
    fit = fit_core_periphery(A, seed=seed)
    assert fit.error_score == 0
    assert tuple(sorted(fit.core_set)) == core
    # every other partition is strictly worse
    others = [score_oracle(A, c) for c in all_partitions(n) if c != core]
    assert min(others) > 0


def test_example_size_twelve_core_four():
    A, core = perfect_cp(np.random.default_rng(42), 12, 4)
    fit = fit_core_periphery(A, seed=0)
    assert (fit.error_score, tuple(sorted(fit.core_set))) == (0, core)


@pytest.mark.parametrize("n", [3, 5, 8])
def test_complete_graph_tie_rule(n):
    A = np.ones((n, n)) - np.eye(n)
    fit = fit_core_periphery(A, seed=1)
    score, size, core = best_by_enumeration(A > 0)
    assert fit.error_score == score == 0
    assert tuple(sorted(fit.core_set)) == core == tuple(range(n - 1))


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(3, 9), p=st.floats(0.05, 0.95))
def test_fit_is_global_optimum_on_small_graphs(seed, n, p):
    rng = np.random.default_rng(seed)
    A = rng.random((n, n)) < p
    np.fill_diagonal(A, False)
    fit = fit_core_periphery(A, seed=seed)
    score, size, core = best_by_enumeration(A)
    assert (fit.error_score, len(fit.core_set), tuple(sorted(fit.core_set))) == (score, size, core)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(3, 30), p=st.floats(0.05, 0.95))
def test_fit_beats_trivial_partitions(seed, n, p):
    rng = np.random.default_rng(seed)
    A = rng.random((n, n)) < p
    np.fill_diagonal(A, False)
    for method in ("auto", "greedy"):
        fit = fit_core_periphery(A, seed=seed, restarts=5, method=method)
        assert fit.error_score == cp_error(A, fit.core_set)
        trivial = [cp_error(A, [i]) for i in range(n)] + [cp_error(A, [j for j in range(n) if j != i]) for i in range(n)]
        assert fit.error_score <= min(trivial)
        assert 0 < len(fit.core_set) < n


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(3, 12), p=st.floats(0.05, 0.95))
def test_fitted_score_invariant_under_relabeling(seed, n, p):
    rng = np.random.default_rng(seed)
    A = rng.random((n, n)) < p
    np.fill_diagonal(A, False)
    perm = rng.permutation(n)
    assert fit_core_periphery(A, seed=0).error_score == fit_core_periphery(A[np.ix_(perm, perm)], seed=0).error_score


def test_greedy_recovers_noisy_planted_core():
    hits = []
    for seed in range(3):
        A, truth = noisy_cp(np.random.default_rng(seed), 100, 20)
        fit = fit_core_periphery(A, seed=seed)
        hits.append(np.mean(fit.coreness.astype(bool) == truth))
    assert min(hits) >= 0.95


def test_greedy_is_deterministic_given_seed():
    A, _ = noisy_cp(np.random.default_rng(9), 40, 8)
    a = fit_core_periphery(A, seed=123, method="greedy")
    b = fit_core_periphery(A, seed=123, method="greedy")
    assert a.core_set == b.core_set and a.error_score == b.error_score


def test_fit_needs_three_banks():
    with pytest.raises(ValueError):
        fit_core_periphery(np.array([[0, 1.0], [1.0, 0]]), seed=0)


def test_partition_fields_and_block_summary():
    A, core = perfect_cp(np.random.default_rng(5), 8, 3)
    W = A * 2.0
    net = QuarterlyNetwork.from_dense(W, bank_ids=[f"b{i}" for i in range(8)])
    fit = fit_core_periphery(net, seed=0)
    assert fit.core_ids == [f"b{i}" for i in core]
    assert fit.coreness.tolist() == [int(i in core) for i in range(8)]
    s = block_summary(net, fit)
    assert s["n_core"] == 3 and s["n_periphery"] == 5
    assert s["links_cc"] == 6 and s["links_pp"] == 0
    assert sum(s[f"links_{b}"] for b in ("cc", "cp", "pc", "pp")) == net.n_links
    assert sum(s[f"volume_{b}"] for b in ("cc", "cp", "pc", "pp")) == pytest.approx(W.sum())


def test_greedy_never_worse_than_trivial_cores():
    # three banks where every restart stalls at core {0} with score 2 while core {2} scores 0
    rng = np.random.default_rng(60353)
    A = rng.random((3, 3)) < 0.5
    np.fill_diagonal(A, False)
    fit = fit_core_periphery(A, seed=60353, restarts=5, method="greedy")
    assert fit.error_score == 0 and fit.core_set == frozenset({2})
