"""Transaction records and quarterly interbank networks.

Raw loan events are aggregated per calendar quarter into a directed weighted
graph ``W`` where ``W[i, j]`` is the overnight volume lent by bank ``i`` to
bank ``j``. Each quarterly graph is then restricted to its largest weakly
connected component.
"""
from __future__ import annotations

import csv
import datetime as dt
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

MATURITY_CODES = (
    "ON", "ONL", "TN", "TNL", "SN", "SNL", "1W", "1WL", "2W", "3W",
    "1M", "2M", "3M", "4M", "5M", "6M", "7M", "8M", "9M", "10M", "11M", "1Y",
)
OVERNIGHT = "ON"

TRANSACTION_FIELDS = ("date", "time", "lender_id", "borrower_id", "amount", "rate", "maturity")
EDGELIST_FIELDS = ("quarter", "lender", "borrower", "weight")


class RecordError(ValueError):
    """A transaction record failed validation."""

    def __init__(self, index: int, reason: str):
        self.index = index
        self.reason = reason
        super().__init__(f"record {index}: {reason}")


class EmptyNetworkError(ValueError):
    pass


@dataclass(frozen=True)
class TransactionRecord:
    date: dt.date
    lender_id: str
    borrower_id: str
    amount: float
    maturity: str = OVERNIGHT
    time: int | None = None
    rate: float | None = None

    @property
    def quarter(self) -> str:
        return quarter_label(self.date)


def quarter_label(day: dt.date) -> str:
    return f"{day.year}Q{(day.month - 1) // 3 + 1}"


def parse_quarter(label: str) -> tuple[int, int]:
    """``'2007Q3'`` -> ``(2007, 3)``."""
    year, q = label.upper().split("Q")
    q = int(q)
    if not 1 <= q <= 4:
        raise ValueError(f"bad quarter label {label!r}")
    return int(year), q


def quarter_range(start: str, stop: str) -> list[str]:
    """Inclusive list of quarter labels from ``start`` to ``stop``."""
    y, q = parse_quarter(start)
    y1, q1 = parse_quarter(stop)
    out = []
    while (y, q) <= (y1, q1):
        out.append(f"{y}Q{q}")
        y, q = (y + 1, 1) if q == 4 else (y, q + 1)
    return out


def quarter_bounds(label: str) -> tuple[dt.date, dt.date]:
    """First and last calendar day of a quarter."""
    y, q = parse_quarter(label)
    first = dt.date(y, 3 * q - 2, 1)
    nxt = dt.date(y + 1, 1, 1) if q == 4 else dt.date(y, 3 * q + 1, 1)
    return first, nxt - dt.timedelta(days=1)


def validate_record(rec: TransactionRecord) -> str | None:
    """Return the reason a record is invalid, or ``None``."""
    if not (isinstance(rec.amount, (int, float)) and math.isfinite(rec.amount)):
        return f"non-numeric amount {rec.amount!r}"
    if rec.amount <= 0:
        return f"nonpositive amount {rec.amount}"
    if rec.lender_id == rec.borrower_id:
        return f"self-loop on bank {rec.lender_id!r}"
    if rec.maturity not in MATURITY_CODES:
        return f"unknown maturity code {rec.maturity!r}"
    if rec.time is not None and not 0 <= rec.time < 86400:
        return f"time of day out of range: {rec.time}"
    return None


def validate_records(records: Sequence[TransactionRecord]) -> list[tuple[int, str]]:
    """All ``(index, reason)`` rejections in ``records``."""
    out = []
    for i, rec in enumerate(records):
        reason = validate_record(rec)
        if reason is not None:
            out.append((i, reason))
    return out


@dataclass(frozen=True, eq=False)
class QuarterlyNetwork:
    """Directed weighted interbank graph for one quarter.

    ``weights`` is a CSR matrix with zero diagonal and strictly positive
    stored entries; row ``i`` / column ``j`` correspond to ``bank_ids[i]`` /
    ``bank_ids[j]``. Instances are treated as immutable.
    """

    quarter: str
    bank_ids: tuple[str, ...]
    weights: sp.csr_matrix = field(repr=False)

    def __post_init__(self):
        W = sp.csr_matrix(self.weights, dtype=float, copy=True)
        W.eliminate_zeros()
        W.sort_indices()
        n = len(self.bank_ids)
        if n < 1:
            raise ValueError("network needs at least one bank")
        if W.shape != (n, n):
            raise ValueError(f"weights shape {W.shape} does not match {n} banks")
        if len(set(self.bank_ids)) != n:
            raise ValueError("duplicate bank ids")
        if W.diagonal().any():
            raise ValueError("self-loops are not allowed")
        if W.nnz and W.data.min() <= 0:
            raise ValueError("weights must be nonnegative")
        if n > 1:
            ncomp, _ = connected_components(W, directed=True, connection="weak")
            if ncomp != 1:
                raise ValueError(f"network is not weakly connected ({ncomp} components)")
        W.data.flags.writeable = False
        object.__setattr__(self, "bank_ids", tuple(self.bank_ids))
        object.__setattr__(self, "weights", W)

    @property
    def n_banks(self) -> int:
        return len(self.bank_ids)

    @property
    def n_links(self) -> int:
        return int(self.weights.nnz)

    def dense(self) -> np.ndarray:
        return self.weights.toarray()

    def adjacency(self) -> np.ndarray:
        return self.dense() > 0

    def index_of(self, bank_id: str) -> int:
        return self.bank_ids.index(bank_id)

    def edges(self) -> Iterable[tuple[str, str, float]]:
        W = self.weights.tocoo()
        order = np.lexsort((W.col, W.row))
        for i, j, w in zip(W.row[order], W.col[order], W.data[order]):
            yield self.bank_ids[i], self.bank_ids[j], float(w)

    @classmethod
    def from_dense(cls, W, quarter: str = "", bank_ids: Sequence[str] | None = None):
        W = np.asarray(W, dtype=float)
        if bank_ids is None:
            bank_ids = [str(i) for i in range(W.shape[0])]
        return cls(quarter, tuple(bank_ids), sp.csr_matrix(W))

    def __eq__(self, other):
        if not isinstance(other, QuarterlyNetwork):
            return NotImplemented
        return (
            self.quarter == other.quarter
            and self.bank_ids == other.bank_ids
            and self.weights.shape == other.weights.shape
            and (self.weights != other.weights).nnz == 0
        )

    __hash__ = None


def weakly_connected_component(W) -> tuple[np.ndarray, sp.csr_matrix]:
    """Largest weakly connected component of a square weight matrix.

    Returns the sorted node indices kept and the induced submatrix. Among
    several components of maximal size the one containing the smallest node
    index wins. Isolated nodes never form a component.
    """
    W = sp.csr_matrix(W, dtype=float, copy=True)
    if W.shape[0] != W.shape[1]:
        raise ValueError(f"weight matrix must be square, got {W.shape}")
    W.eliminate_zeros()
    if W.nnz == 0:
        raise EmptyNetworkError("no edges")
    _, labels = connected_components(W, directed=True, connection="weak")
    sizes = np.bincount(labels)
    first = np.full(sizes.size, labels.size)
    np.minimum.at(first, labels, np.arange(labels.size))
    best = min(range(sizes.size), key=lambda c: (-sizes[c], first[c]))
    keep = np.flatnonzero(labels == best)
    return keep, W[keep][:, keep].tocsr()


def reduce_to_wcc(quarter: str, bank_ids: Sequence[str], W) -> QuarterlyNetwork:
    keep, sub = weakly_connected_component(W)
    return QuarterlyNetwork(quarter, tuple(bank_ids[i] for i in keep), sub)


def aggregate_quarters(
    records: Sequence[TransactionRecord],
) -> list[tuple[str, tuple[str, ...], sp.csr_matrix]]:
    """Sum ON volumes per (quarter, lender, borrower) without WCC reduction.

    Banks inside a quarter are ordered by their identifier.
    """
    for i, rec in enumerate(records):
        reason = validate_record(rec)
        if reason is not None:
            raise RecordError(i, reason)

    amounts: dict[str, dict[tuple[str, str], list[float]]] = defaultdict(lambda: defaultdict(list))
    for rec in records:
        if rec.maturity != OVERNIGHT:
            continue
        amounts[rec.quarter][rec.lender_id, rec.borrower_id].append(float(rec.amount))

    out = []
    for q in sorted(amounts, key=parse_quarter):
        # correctly rounded sums: independent of record order and of how a
        # loan is split into transactions
        pairs = {pair: math.fsum(v) for pair, v in amounts[q].items()}
        ids = sorted({b for pair in pairs for b in pair})
        index = {b: k for k, b in enumerate(ids)}
        rows = [index[a] for a, _ in pairs]
        cols = [index[b] for _, b in pairs]
        W = sp.csr_matrix((list(pairs.values()), (rows, cols)), shape=(len(ids), len(ids)))
        out.append((q, tuple(ids), W))
    return out


def build_quarterly_networks(records: Sequence[TransactionRecord]) -> list[QuarterlyNetwork]:
    """Quarterly ON networks, each reduced to its largest weakly connected component.

    Raises
    ------
    RecordError
        On the first malformed record, carrying its index.
    """
    return [reduce_to_wcc(q, ids, W) for q, ids, W in aggregate_quarters(records)]


def bank_index(networks: Iterable[QuarterlyNetwork]) -> dict[str, int]:
    """Global bank id -> dense index map across quarters (sorted ids)."""
    ids = sorted({b for net in networks for b in net.bank_ids})
    return {b: i for i, b in enumerate(ids)}


# ---------------------------------------------------------------------------
# CSV input / output

def _parse_time(text: str) -> int | None:
    text = text.strip()
    if not text:
        return None
    if ":" in text:
        parts = [int(p) for p in text.split(":")]
        parts += [0] * (3 - len(parts))
        h, m, s = parts
        return 3600 * h + 60 * m + s
    return int(float(text))


def _format_time(seconds: int | None) -> str:
    if seconds is None:
        return ""
    h, rem = divmod(int(seconds), 3600)
    m, s = divmod(rem, 60)
    return f"{h:02d}:{m:02d}:{s:02d}"


def _data_lines(handle):
    for line in handle:
        if not line.startswith("#"):
            yield line


def read_transactions_csv(path) -> list[TransactionRecord]:
    """Parse a transaction log ``date,time,lender_id,borrower_id,amount,rate,maturity``.

    Lines starting with ``#`` are treated as metadata and skipped. Parse
    failures raise :class:`RecordError` with the zero-based data-row index.
    """
    records = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(_data_lines(fh))
        missing = set(TRANSACTION_FIELDS) - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"{path}: missing columns {sorted(missing)}")
        for i, row in enumerate(reader):
            try:
                rate = row["rate"].strip()
                records.append(TransactionRecord(
                    date=dt.date.fromisoformat(row["date"].strip()),
                    time=_parse_time(row["time"]),
                    lender_id=row["lender_id"].strip(),
                    borrower_id=row["borrower_id"].strip(),
                    amount=float(row["amount"]),
                    rate=float(rate) if rate else None,
                    maturity=row["maturity"].strip().upper(),
                ))
            except (ValueError, TypeError, AttributeError) as exc:
                raise RecordError(i, f"unparseable row ({exc})") from exc
    return records


def write_transactions_csv(records: Iterable[TransactionRecord], path, header_comment: str | None = None):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRANSACTION_FIELDS)
        for r in records:
            writer.writerow([
                r.date.isoformat(), _format_time(r.time), r.lender_id, r.borrower_id,
                repr(float(r.amount)), "" if r.rate is None else repr(float(r.rate)), r.maturity,
            ])


def write_edgelist(networks: Iterable[QuarterlyNetwork], path, header_comment: str | None = None):
    """Write networks as ``quarter,lender,borrower,weight`` rows."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(EDGELIST_FIELDS)
        for net in networks:
            for a, b, w in net.edges():
                writer.writerow([net.quarter, a, b, repr(w)])


def read_edgelist(path) -> list[QuarterlyNetwork]:
    """Inverse of :func:`write_edgelist`. Each quarter must already be weakly connected."""
    edges: dict[str, list[tuple[str, str, float]]] = defaultdict(list)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(_data_lines(fh))
        missing = set(EDGELIST_FIELDS) - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"{path}: missing columns {sorted(missing)}")
        for row in reader:
            edges[row["quarter"]].append((row["lender"], row["borrower"], float(row["weight"])))
    out = []
    for q in sorted(edges, key=parse_quarter):
        ids = sorted({b for a, c, _ in edges[q] for b in (a, c)})
        index = {b: k for k, b in enumerate(ids)}
        rows = [index[a] for a, _, _ in edges[q]]
        cols = [index[c] for _, c, _ in edges[q]]
        vals = [w for _, _, w in edges[q]]
        W = sp.csr_matrix((vals, (rows, cols)), shape=(len(ids), len(ids)))
        out.append(QuarterlyNetwork(q, tuple(ids), W))
    return out
