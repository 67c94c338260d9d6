"""Seeded synthetic overnight-market transaction logs.

Each quarter draws a directed core-periphery graph block by block, gives every
link a log-normal quarterly volume and splits it into one to five overnight
transactions on random days of the quarter.

A per-quarter regime sets three knobs:

* ``activity`` multiplies every loan volume;
* ``connectivity`` multiplies the link probabilities of the core-periphery,
  periphery-core and periphery-periphery blocks (the core block is left
  alone, so a complete core stays complete);
* ``attrition`` is the probability that a bank leaves the market for good
  at the start of the quarter.
"""
from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, field

import numpy as np

from .netcore import TransactionRecord, parse_quarter, quarter_bounds, quarter_range

BLOCKS = ("cc", "cp", "pc", "pp")


@dataclass(frozen=True)
class Regime:
    name: str
    activity: float = 1.0
    connectivity: float = 1.0
    attrition: float = 0.0


PRE = Regime("pre", activity=1.0, connectivity=1.0, attrition=0.0)
CRISIS = Regime("crisis", activity=0.6, connectivity=0.5, attrition=0.02)
POST = Regime("post", activity=0.5, connectivity=0.4, attrition=0.01)

DEFAULT_START, DEFAULT_STOP = "2005Q1", "2011Q4"
DEFAULT_CRISIS = ("2007Q3", "2009Q1")


def regime_schedule(
    start: str = DEFAULT_START,
    stop: str = DEFAULT_STOP,
    crisis: tuple[str, str] = DEFAULT_CRISIS,
    regimes: tuple[Regime, Regime, Regime] = (PRE, CRISIS, POST),
) -> dict[str, Regime]:
    """Quarter -> regime map: before, inside and after the crisis window."""
    lo, hi = parse_quarter(crisis[0]), parse_quarter(crisis[1])
    if lo > hi:
        raise ValueError(f"crisis window {crisis} is reversed")
    pre, mid, post = regimes
    out = {}
    for q in quarter_range(start, stop):
        key = parse_quarter(q)
        out[q] = pre if key < lo else mid if key <= hi else post
    return out


def default_schedule() -> dict[str, Regime]:
    return regime_schedule()


@dataclass(frozen=True)
class SynthSpec:
    n_banks: int = 100
    core_fraction: float = 0.2
    p_cc: float = 0.9
    p_cp: float = 0.3
    p_pc: float = 0.3
    p_pp: float = 0.05
    # log-normal (mu, sigma) of quarterly link volume in millions, per block
    weight_params: dict = field(default_factory=lambda: {
        "cc": (4.0, 1.0), "cp": (3.0, 1.0), "pc": (3.0, 1.0), "pp": (2.0, 1.0),
    })
    schedule: dict = field(default_factory=default_schedule)
    rng_seed: int = 0
    min_banks: int = 10
    max_transactions_per_link: int = 5

    def __post_init__(self):
        if self.n_banks < self.min_banks:
            raise ValueError(f"n_banks must be at least {self.min_banks}")
        if not 0 < self.core_fraction < 1:
            raise ValueError("core_fraction must lie in (0, 1)")
        for name in BLOCKS:
            p = getattr(self, f"p_{name}")
            if not 0 <= p <= 1:
                raise ValueError(f"p_{name} must lie in [0, 1]")
            if name not in self.weight_params:
                raise ValueError(f"missing weight parameters for block {name}")
            mu, sigma = self.weight_params[name]
            if sigma < 0:
                raise ValueError("log-normal sigma must be nonnegative")
        for q, regime in self.schedule.items():
            if regime.activity <= 0 or regime.connectivity < 0 or not 0 <= regime.attrition < 1:
                raise ValueError(f"invalid regime for {q}: {regime}")
        if not self.schedule:
            raise ValueError("empty quarter schedule")

    @property
    def quarters(self) -> list[str]:
        return sorted(self.schedule, key=parse_quarter)

    @property
    def n_core(self) -> int:
        return max(1, int(round(self.core_fraction * self.n_banks)))

    def bank_ids(self) -> list[str]:
        width = len(str(self.n_banks - 1))
        return [f"B{i:0{width}d}" for i in range(self.n_banks)]

    def core_ids(self) -> list[str]:
        return self.bank_ids()[: self.n_core]

    def block_probabilities(self, connectivity: float = 1.0) -> np.ndarray:
        """``n_banks x n_banks`` link probability matrix with zero diagonal."""
        core = np.arange(self.n_banks) < self.n_core
        cc = core[:, None] & core[None, :]
        P = np.where(
            cc, self.p_cc,
            np.where(core[:, None], self.p_cp, np.where(core[None, :], self.p_pc, self.p_pp)),
        )
        P = np.where(cc, P, np.clip(P * connectivity, 0.0, 1.0))
        np.fill_diagonal(P, 0.0)
        return P

    def expected_density(self, connectivity: float = 1.0) -> float:
        P = self.block_probabilities(connectivity)
        n = self.n_banks
        return float(P.sum() / (n * (n - 1)))


def _block_codes(n: int, n_core: int) -> np.ndarray:
    core = np.arange(n) < n_core
    codes = np.where(core[:, None] & core[None, :], 0,
                     np.where(core[:, None], 1, np.where(core[None, :], 2, 3)))
    return codes


def generate(spec: SynthSpec) -> list[TransactionRecord]:
    """Transaction log for every quarter of ``spec.schedule``.

    Identical specs (including ``rng_seed``) give identical logs. Banks
    removed by attrition never return; attrition stops at ``min_banks``.
    """
    rng = np.random.default_rng(spec.rng_seed)
    ids = spec.bank_ids()
    n = spec.n_banks
    alive = np.ones(n, dtype=bool)
    codes = _block_codes(n, spec.n_core)
    mus = np.array([spec.weight_params[b][0] for b in BLOCKS])
    sigmas = np.array([spec.weight_params[b][1] for b in BLOCKS])

    records: list[TransactionRecord] = []
    for q in spec.quarters:
        regime = spec.schedule[q]
        # attrition happens at the start of the quarter
        if regime.attrition > 0:
            leave = alive & (rng.random(n) < regime.attrition)
            room = int(alive.sum()) - spec.min_banks
            if leave.sum() > room:
                drop = np.flatnonzero(leave)[: max(room, 0)]
                leave = np.zeros(n, dtype=bool)
                leave[drop] = True
            alive &= ~leave

        P = spec.block_probabilities(regime.connectivity)
        links = (rng.random((n, n)) < P) & alive[:, None] & alive[None, :]
        src, dst = np.nonzero(links)
        blk = codes[src, dst]
        volume = regime.activity * np.exp(mus[blk] + sigmas[blk] * rng.standard_normal(src.size))

        first, last = quarter_bounds(q)
        n_days = (last - first).days + 1
        n_tx = rng.integers(1, spec.max_transactions_per_link + 1, size=src.size)
        for i, j, v, m in zip(src, dst, volume, n_tx):
            shares = rng.dirichlet(np.ones(m)) if m > 1 else np.ones(1)
            days = rng.integers(0, n_days, size=m)
            secs = rng.integers(8 * 3600, 18 * 3600, size=m)
            rates = np.round(rng.normal(3.0, 0.25, size=m), 3)
            for share, day, sec, rate in zip(shares, days, secs, rates):
                amount = float(v * share)
                if amount <= 0:
                    continue
                records.append(TransactionRecord(
                    date=first + dt.timedelta(days=int(day)),
                    time=int(sec),
                    lender_id=ids[i],
                    borrower_id=ids[j],
                    amount=amount,
                    rate=float(rate),
                    maturity="ON",
                ))
    records.sort(key=lambda r: (r.date, r.time, r.lender_id, r.borrower_id))
    return records
