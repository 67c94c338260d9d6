import datetime as dt
import math
from fractions import Fraction

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import assume, given, settings, strategies as st

from edbnet.netcore import (
    EmptyNetworkError,
    QuarterlyNetwork,
    RecordError,
    TransactionRecord,
    aggregate_quarters,
    bank_index,
    build_quarterly_networks,
    parse_quarter,
    quarter_bounds,
    quarter_label,
    quarter_range,
    read_edgelist,
    read_transactions_csv,
    reduce_to_wcc,
    validate_records,
    weakly_connected_component,
    write_edgelist,
    write_transactions_csv,
)

D = dt.date


def rec(lender, borrower, amount, day=D(2005, 1, 10), maturity="ON", time=None, rate=None):
    return TransactionRecord(day, lender, borrower, amount, maturity, time, rate)


# --- quarters ---------------------------------------------------------------

@pytest.mark.parametrize("day,label", [
    (D(2005, 1, 1), "2005Q1"), (D(2005, 3, 31), "2005Q1"), (D(2005, 4, 1), "2005Q2"),
    (D(2007, 9, 30), "2007Q3"), (D(2008, 10, 1), "2008Q4"), (D(2008, 12, 31), "2008Q4"),
])
def test_calendar_quarters(day, label):
    assert quarter_label(day) == label
    first, last = quarter_bounds(label)
    assert first <= day <= last


def test_quarter_range_and_parse():
    assert quarter_range("2007Q3", "2008Q2") == ["2007Q3", "2007Q4", "2008Q1", "2008Q2"]
    assert quarter_range("2008Q2", "2008Q1") == []
    assert parse_quarter("2009q1") == (2009, 1)
    with pytest.raises(ValueError):
        parse_quarter("2009Q5")


# --- aggregation examples -----------------------------------------------------

def test_empty_input_gives_no_networks():
    assert build_quarterly_networks([]) == []


def test_only_overnight_records_count():
    nets = build_quarterly_networks([
        rec("A", "B", 3.0), rec("A", "B", 2.0), rec("A", "B", 9.0, maturity="1W"),
    ])
    assert len(nets) == 1
    net = nets[0]
    assert net.quarter == "2005Q1"
    assert list(net.edges()) == [("A", "B", 5.0)]


def test_quarter_boundary_splits_networks():
    nets = build_quarterly_networks([
        rec("A", "B", 1.0, day=D(2005, 3, 31)), rec("B", "A", 1.0, day=D(2005, 4, 1)),
    ])
    assert [n.quarter for n in nets] == ["2005Q1", "2005Q2"]
    assert [list(n.edges()) for n in nets] == [[("A", "B", 1.0)], [("B", "A", 1.0)]]


def test_output_sorted_by_quarter():
    nets = build_quarterly_networks([
        rec("A", "B", 1.0, day=D(2006, 5, 1)), rec("A", "B", 1.0, day=D(2005, 12, 1)),
        rec("A", "B", 1.0, day=D(2006, 1, 1)),
    ])
    assert [n.quarter for n in nets] == ["2005Q4", "2006Q1", "2006Q2"]


def test_quarter_with_only_term_loans_is_absent():
    nets = build_quarterly_networks([rec("A", "B", 1.0, maturity="1M"), rec("A", "B", 1.0, day=D(2005, 5, 1))])
    assert [n.quarter for n in nets] == ["2005Q2"]


@pytest.mark.parametrize("bad,reason", [
    (rec("A", "B", 0.0), "nonpositive"),
    (rec("A", "B", -1.0), "nonpositive"),
    (rec("A", "A", 1.0), "self-loop"),
    (rec("A", "B", 1.0, maturity="XX"), "maturity"),
    (rec("A", "B", float("nan")), "amount"),
])
def test_malformed_record_rejected_with_index(bad, reason):
    records = [rec("A", "B", 1.0), rec("B", "C", 1.0), bad]
    with pytest.raises(RecordError) as err:
        build_quarterly_networks(records)
    assert err.value.index == 2
    assert reason in err.value.reason
    assert validate_records(records) == [(2, err.value.reason)]


# --- weakly connected component ----------------------------------------------

def test_wcc_drops_isolated_bank():
    W = np.zeros((3, 3))
    W[0, 1] = 1.0
    keep, sub = weakly_connected_component(W)
    assert keep.tolist() == [0, 1]
    assert sub.toarray().tolist() == [[0, 1], [0, 0]]


def test_wcc_tie_goes_to_smallest_member():
    # {A->B} and {C<->D}: equal sizes, the component holding index 0 wins
    W = np.zeros((4, 4))
    W[0, 1] = 1
    W[2, 3] = W[3, 2] = 1
    assert weakly_connected_component(W)[0].tolist() == [0, 1]
    # relabel so the mutual dyad holds the smallest index
    W = np.zeros((4, 4))
    W[2, 3] = 1
    W[0, 1] = W[1, 0] = 1
    assert weakly_connected_component(W)[0].tolist() == [0, 1]
    W = np.zeros((4, 4))
    W[1, 3] = 1
    W[0, 2] = 1
    assert weakly_connected_component(W)[0].tolist() == [0, 2]


def test_wcc_prefers_larger_component():
    W = np.zeros((5, 5))
    W[0, 1] = 1
    W[2, 3] = W[3, 4] = 1
    assert weakly_connected_component(W)[0].tolist() == [2, 3, 4]


def test_wcc_identity_on_connected_graph():
    W = np.ones((4, 4)) - np.eye(4)
    keep, sub = weakly_connected_component(W)
    assert keep.tolist() == [0, 1, 2, 3]
    np.testing.assert_array_equal(sub.toarray(), W)


def test_wcc_of_empty_graph_raises():
    with pytest.raises(EmptyNetworkError, match="no edges"):
        weakly_connected_component(np.zeros((3, 3)))


def test_weak_connectivity_ignores_direction():
    # 0 -> 1 <- 2 is weakly but not strongly connected
    W = np.zeros((3, 3))
    W[0, 1] = W[2, 1] = 1
    assert weakly_connected_component(W)[0].tolist() == [0, 1, 2]


def random_sparse(rng, n, p):
    W = (rng.random((n, n)) < p) * rng.exponential(1.0, (n, n))
    np.fill_diagonal(W, 0)
    return W


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 25), p=st.floats(0.02, 0.4))
def test_wcc_idempotent_and_connected(seed, n, p):
    W = random_sparse(np.random.default_rng(seed), n, p)
    assume(W.any())
    ids = [f"b{i}" for i in range(n)]
    net = reduce_to_wcc("2005Q1", ids, W)
    again = reduce_to_wcc("2005Q1", net.bank_ids, net.weights)
    assert again == net
    # brute-force: every kept node is reached from node 0 in the undirected closure
    U = (net.dense() > 0) | (net.dense() > 0).T
    seen = {0}
    frontier = [0]
    while frontier:
        v = frontier.pop()
        for w in np.flatnonzero(U[v]):
            if w not in seen:
                seen.add(int(w))
                frontier.append(int(w))
    assert len(seen) == net.n_banks


# --- invariants --------------------------------------------------------------

banks = st.sampled_from(["A", "B", "C", "D", "E"])
days = st.dates(D(2005, 1, 1), D(2006, 12, 31))


@st.composite
def record_lists(draw):
    n = draw(st.integers(1, 30))
    out = []
    for _ in range(n):
        a = draw(banks)
        b = draw(banks.filter(lambda x: x != a))
        amount = draw(st.floats(0.01, 1e4, allow_nan=False))
        maturity = draw(st.sampled_from(["ON", "ON", "ON", "1W", "TN"]))
        out.append(rec(a, b, amount, day=draw(days), maturity=maturity))
    return out


@settings(max_examples=80, deadline=None)
@given(records=record_lists())
def test_quarter_partition_conserves_volume(records):
    total_on = math.fsum(r.amount for r in records if r.maturity == "ON")
    raw = aggregate_quarters(records)
    assert math.fsum(W.sum() for _, _, W in raw) == pytest.approx(total_on, rel=1e-12)
    quarters = {r.quarter for r in records if r.maturity == "ON"}
    assert [q for q, _, _ in raw] == sorted(quarters, key=parse_quarter)


@settings(max_examples=80, deadline=None)
@given(records=record_lists(), k=st.integers(0, 29), frac=st.floats(0.001, 0.999), data=st.data())
def test_splitting_a_transaction_is_bit_identical(records, k, frac, data):
    k = k % len(records)
    r = records[k]
    x1 = r.amount * frac
    x2 = r.amount - x1
    # the two parts must add up to the original amount exactly
    assume(x1 > 0 and x2 > 0 and Fraction(x1) + Fraction(x2) == Fraction(r.amount))
    split = records[:k] + [rec(r.lender_id, r.borrower_id, x1, r.date, r.maturity),
                           rec(r.lender_id, r.borrower_id, x2, r.date, r.maturity)] + records[k + 1:]
    split = data.draw(st.permutations(split))
    assert build_quarterly_networks(split) == build_quarterly_networks(records)


def test_quarterly_network_invariants_enforced():
    with pytest.raises(ValueError):
        QuarterlyNetwork.from_dense([[1.0, 1.0], [0, 0]])
    with pytest.raises(ValueError):
        QuarterlyNetwork.from_dense([[0, -1.0], [0, 0]])
    with pytest.raises(ValueError, match="weakly connected"):
        QuarterlyNetwork.from_dense(np.array([[0, 1, 0, 0], [0, 0, 0, 0], [0, 0, 0, 1], [0, 0, 0, 0.0]]))
    with pytest.raises(ValueError):
        QuarterlyNetwork("2005Q1", ("a", "a"), sp.csr_matrix(np.array([[0, 1.0], [0, 0]])))


def test_network_is_read_only():
    net = QuarterlyNetwork.from_dense([[0, 2.0], [1.0, 0]])
    with pytest.raises(ValueError):
        net.weights.data[0] = 5.0
    assert net.n_banks == 2 and net.n_links == 2


def test_bank_index_is_global_and_sorted():
    nets = build_quarterly_networks([
        rec("C", "A", 1.0), rec("B", "D", 1.0, day=D(2005, 6, 1)),
    ])
    assert bank_index(nets) == {"A": 0, "B": 1, "C": 2, "D": 3}


# --- files -------------------------------------------------------------------

def test_transaction_csv_round_trip(tmp_path):
    records = [
        rec("A", "B", 1.25, time=3600 + 61, rate=3.1),
        rec("B", "C", 0.1 + 0.2, day=D(2005, 7, 4), maturity="ONL"),
    ]
    path = tmp_path / "tx.csv"
    write_transactions_csv(records, path, header_comment="provenance")
    assert path.read_text().startswith("# provenance\ndate,time,")
    assert read_transactions_csv(path) == records


def test_transaction_csv_reports_bad_row(tmp_path):
    path = tmp_path / "tx.csv"
    path.write_text("date,time,lender_id,borrower_id,amount,rate,maturity\n"
                    "2005-01-03,,A,B,1.0,,ON\n"
                    "2005-13-03,,A,B,1.0,,ON\n")
    with pytest.raises(RecordError) as err:
        read_transactions_csv(path)
    assert err.value.index == 1


def test_transaction_csv_needs_all_columns(tmp_path):
    path = tmp_path / "tx.csv"
    path.write_text("date,lender_id,borrower_id,amount\n2005-01-03,A,B,1.0\n")
    with pytest.raises(ValueError, match="missing columns"):
        read_transactions_csv(path)


def test_edgelist_round_trip(tmp_path):
    rng = np.random.default_rng(4)
    nets = []
    for q in ["2005Q1", "2005Q2"]:
        W = random_sparse(rng, 12, 0.3)
        nets.append(reduce_to_wcc(q, [f"bank{i:02d}" for i in range(12)], W))
    path = tmp_path / "edges.csv"
    write_edgelist(nets, path)
    assert read_edgelist(path) == nets
