"""Exposed-Distressed-Bankrupted (EDB) liquidity contagion.

Banks are Exposed (healthy), Distressed or Bankrupted. A distressed or
bankrupted lender ``i`` cuts funding to an exposed borrower ``j`` with
probability ``phi(w_ij / s_i_out)``; a distressed bank fails with probability
``psi(share of its borrowing that came from unhealthy lenders)``. Both shape
functions map [0, 1] onto [0, 1] with fixed end points.

One simulation step is

1. infection: every unhealthy lender (state at step start) independently
   tries each of its exposed borrowers; one success is enough;
2. bankruptcy: every distressed bank, including those infected in step 1,
   fails with the probability computed from the post-infection states.

A run stops when no distressed bank is left or after ``max_steps`` steps.

Randomness: realization ``r`` draws from its own Philox stream keyed by
``(rng_seed, r)``. Per step it consumes one uniform per edge and then one per
bank, whatever the current states are, so two scenarios run with the same
seed are coupled draw for draw.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .netcore import QuarterlyNetwork
from .special import regularized_incomplete_beta

EXPOSED, DISTRESSED, BANKRUPTED = 0, 1, 2
STATE_NAMES = ("E", "D", "B")

DEFAULT_MAX_STEPS = 100
DEFAULT_REALIZATIONS = 5000

# max (realizations x edges) held in memory at once per batch
_BATCH_BUDGET = 2_000_000


# ---------------------------------------------------------------------------
# scenario shape functions

@dataclass(frozen=True)
class Identity:
    def __call__(self, x):
        return np.asarray(x, dtype=float) if np.ndim(x) else float(x)

    def describe(self) -> str:
        return "identity"


@dataclass(frozen=True)
class BetaShape:
    """``x -> I_x(a, b)``."""

    a: float
    b: float

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise ValueError("beta shape parameters must be positive")

    def __call__(self, x):
        return regularized_incomplete_beta(x, self.a, self.b)

    def describe(self) -> str:
        return f"beta({self.a:g},{self.b:g})"


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    phi: Identity | BetaShape
    psi: Identity | BetaShape

    def as_dict(self) -> dict:
        return {"name": self.name, "phi": self.phi.describe(), "psi": self.psi.describe()}


NONLINEAR_CONTAGION = BetaShape(1, 2)
NONLINEAR_DEFAULT = BetaShape(5, 20)

SCENARIOS = {
    "LC-LD": ScenarioSpec("LC-LD", Identity(), Identity()),
    "LC-NLD": ScenarioSpec("LC-NLD", Identity(), NONLINEAR_DEFAULT),
    "NLC-NLD": ScenarioSpec("NLC-NLD", NONLINEAR_CONTAGION, NONLINEAR_DEFAULT),
}


def scenario(name: str = "LC-LD", phi_beta=None, psi_beta=None) -> ScenarioSpec:
    """Look up a named scenario, optionally overriding either shape with ``I_x(a, b)``."""
    base = SCENARIOS[name.upper()]
    if phi_beta is None and psi_beta is None:
        return base
    phi = BetaShape(*phi_beta) if phi_beta is not None else base.phi
    psi = BetaShape(*psi_beta) if psi_beta is not None else base.psi
    return ScenarioSpec("custom", phi, psi)


# ---------------------------------------------------------------------------
# configuration and results

@dataclass(frozen=True)
class SimConfig:
    seed_density: float
    scenario: ScenarioSpec = SCENARIOS["LC-LD"]
    max_steps: int = DEFAULT_MAX_STEPS
    n_realizations: int = DEFAULT_REALIZATIONS
    rng_seed: int = 0

    def __post_init__(self):
        if not 0 < self.seed_density <= 1:
            raise ValueError("seed_density must lie in (0, 1]")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")
        if self.n_realizations < 1:
            raise ValueError("n_realizations must be >= 1")

    def n_seeds(self, n_banks: int) -> int:
        # guard against 0.05 * 100 = 5.000000000000001 style rounding
        m = math.ceil(round(self.seed_density * n_banks, 9))
        if m < 1 or m > n_banks:
            raise ValueError(f"seed count {m} invalid for {n_banks} banks")
        return m

    def as_dict(self) -> dict:
        return {
            "seed_density": self.seed_density,
            "scenario": self.scenario.as_dict(),
            "max_steps": self.max_steps,
            "n_realizations": self.n_realizations,
            "rng_seed": self.rng_seed,
        }


@dataclass
class RunRecord:
    final_states: np.ndarray
    stop_step: int
    hit_cap: bool
    history: list[np.ndarray] | None = None

    @property
    def bankrupted(self) -> np.ndarray:
        return self.final_states == BANKRUPTED


@dataclass
class EnsembleResult:
    bank_ids: tuple[str, ...]
    config: SimConfig
    bankrupted_fraction_mean: float
    bankrupted_fraction_std: float
    liquidity_loss_mean: float
    liquidity_loss_std: float
    per_bank_default_frequency: np.ndarray
    mean_stop_step: float
    fraction_hitting_cap: float
    bankrupted_fractions: np.ndarray = field(repr=False)
    liquidity_losses: np.ndarray = field(repr=False)
    stop_steps: np.ndarray = field(repr=False)

    @property
    def bankrupted_fraction_se(self) -> float:
        return self.bankrupted_fraction_std / math.sqrt(self.config.n_realizations)

    def summary(self) -> dict:
        return {
            "n_banks": len(self.bank_ids),
            "bankrupted_fraction_mean": self.bankrupted_fraction_mean,
            "bankrupted_fraction_std": self.bankrupted_fraction_std,
            "liquidity_loss_mean": self.liquidity_loss_mean,
            "liquidity_loss_std": self.liquidity_loss_std,
            "mean_stop_step": self.mean_stop_step,
            "fraction_hitting_cap": self.fraction_hitting_cap,
        }


# ---------------------------------------------------------------------------
# single-transition probabilities

def _weights(net) -> np.ndarray:
    return net.dense() if isinstance(net, QuarterlyNetwork) else np.asarray(net, dtype=float)


def infection_probability(net, i: int, j: int, scen: ScenarioSpec) -> float:
    """Probability that unhealthy lender ``i`` cuts funding to exposed borrower ``j``."""
    W = _weights(net)
    if W[i, j] <= 0:
        raise ValueError(f"no loan from {i} to {j}")
    return float(scen.phi(W[i, j] / W[i].sum()))


def bankruptcy_probability(net, i: int, states, scen: ScenarioSpec) -> float:
    """Failure probability of distressed bank ``i`` given all bank states.

    A bank without lenders faces no funding withdrawal and never fails.
    """
    W = _weights(net)
    states = np.asarray(states)
    s_in = W[:, i].sum()
    if s_in <= 0:
        return 0.0
    unhealthy = states != EXPOSED
    return float(scen.psi(W[unhealthy, i].sum() / s_in))


# ---------------------------------------------------------------------------
# simulation engine

class _Prepared:
    """Static per-network arrays shared by all realizations."""

    def __init__(self, net, scen: ScenarioSpec):
        W = sp.csr_matrix(net.weights if isinstance(net, QuarterlyNetwork) else _weights(net), copy=True)
        W.eliminate_zeros()
        W.sort_indices()
        coo = W.tocoo()
        self.n = W.shape[0]
        self.src = coo.row.astype(np.int64)
        self.dst = coo.col.astype(np.int64)
        self.n_edges = self.src.size
        s_out = np.asarray(W.sum(axis=1)).ravel()
        s_in = np.asarray(W.sum(axis=0)).ravel()
        self.s_out = s_out
        self.s_in = s_in
        self.has_lenders = s_in > 0
        self.lam = np.asarray(scen.phi(coo.data / s_out[self.src]), dtype=float)
        self.psi = scen.psi
        # incidence E x N mapping an edge to its borrower
        self.to_dst = sp.csr_matrix(
            (np.ones(self.n_edges), (np.arange(self.n_edges), self.dst)),
            shape=(self.n_edges, self.n),
        )
        self.W = W


def realization_rng(rng_seed: int, index: int) -> np.random.Generator:
    """Counter-based stream for realization ``index`` of master seed ``rng_seed``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(rng_seed, spawn_key=(index,))))


def _run_batch(prep: _Prepared, gens, n_seeds: int, max_steps: int, record_history: bool = False):
    """Simulate one realization per generator, vectorised across the batch."""
    B, n, E = len(gens), prep.n, prep.n_edges
    states = np.zeros((B, n), dtype=np.int8)
    for r, g in enumerate(gens):
        states[r, g.choice(n, size=n_seeds, replace=False)] = DISTRESSED

    stop = np.zeros(B, dtype=np.int64)
    hit_cap = np.zeros(B, dtype=bool)
    active = np.ones(B, dtype=bool)
    history = [[states[r].copy()] for r in range(B)] if record_history else None

    for step in range(1, max_steps + 1):
        rows = np.flatnonzero(active)
        if rows.size == 0:
            break
        u = np.empty((rows.size, E + n))
        for k, r in enumerate(rows):
            gens[r].random(out=u[k])
        u_edge, u_bank = u[:, :E], u[:, E:]

        S = states[rows]
        unhealthy = S != EXPOSED
        exposed = ~unhealthy
        fired = unhealthy[:, prep.src] & exposed[:, prep.dst] & (u_edge < prep.lam)
        if E:
            hit = np.asarray((prep.to_dst.T @ fired.T.astype(float)).T) > 0
        else:
            hit = np.zeros_like(exposed)
        S[hit & exposed] = DISTRESSED

        unhealthy = (S != EXPOSED).astype(float)
        lost = np.asarray((prep.W.T @ unhealthy.T).T)
        share = np.zeros_like(lost)
        np.divide(lost, prep.s_in, out=share, where=prep.has_lenders)
        share = np.clip(share, 0.0, 1.0)
        mu = np.where(prep.has_lenders, prep.psi(share), 0.0)
        distressed = S == DISTRESSED
        S[distressed & (u_bank < mu)] = BANKRUPTED
        states[rows] = S

        if record_history:
            for k, r in enumerate(rows):
                history[r].append(S[k].copy())

        done = ~(S == DISTRESSED).any(axis=1)
        stop[rows[done]] = step
        active[rows[done]] = False
        if step == max_steps:
            still = rows[~done]
            stop[still] = step
            hit_cap[still] = True
            active[still] = False

    return states, stop, hit_cap, history


def simulate_once(net, config: SimConfig, rng: np.random.Generator, record_history: bool = False) -> RunRecord:
    """One EDB realization drawing from ``rng``.

    With ``record_history`` the returned record holds the state vector
    after seeding and after every step.
    """
    prep = _Prepared(net, config.scenario)
    m = config.n_seeds(prep.n)
    states, stop, cap, hist = _run_batch(prep, [rng], m, config.max_steps, record_history)
    return RunRecord(states[0], int(stop[0]), bool(cap[0]), hist[0] if hist else None)


def _batch_size(prep: _Prepared) -> int:
    return max(1, _BATCH_BUDGET // max(1, prep.n_edges + prep.n))


def run_realizations(net, config: SimConfig, indices, record_history: bool = False):
    """Final states, stop steps and cap flags for selected realization indices."""
    prep = _Prepared(net, config.scenario)
    m = config.n_seeds(prep.n)
    gens = [realization_rng(config.rng_seed, int(i)) for i in indices]
    return _run_batch(prep, gens, m, config.max_steps, record_history)


def simulate_ensemble(net, config: SimConfig, workers: int = 1) -> EnsembleResult:
    """Run ``config.n_realizations`` independent realizations and aggregate them.

    The result depends only on ``(net, config)``; ``workers`` only changes
    how the realization index range is split across threads.
    """
    prep = _Prepared(net, config.scenario)
    m = config.n_seeds(prep.n)
    R = config.n_realizations
    size = _batch_size(prep)
    if workers > 1:
        size = min(size, max(1, math.ceil(R / workers)))
    chunks = [range(a, min(a + size, R)) for a in range(0, R, size)]

    def work(chunk):
        gens = [realization_rng(config.rng_seed, i) for i in chunk]
        states, stop, cap, _ = _run_batch(prep, gens, m, config.max_steps)
        return states, stop, cap

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(work, chunks))
    else:
        parts = [work(c) for c in chunks]

    states = np.concatenate([p[0] for p in parts])
    stop = np.concatenate([p[1] for p in parts])
    cap = np.concatenate([p[2] for p in parts])

    bankrupt = states == BANKRUPTED
    frac = bankrupt.mean(axis=1)
    total_out = prep.s_out.sum()
    loss = (bankrupt @ prep.s_out) / total_out
    ids = net.bank_ids if isinstance(net, QuarterlyNetwork) else tuple(str(i) for i in range(prep.n))
    return EnsembleResult(
        bank_ids=ids,
        config=config,
        bankrupted_fraction_mean=float(frac.mean()),
        bankrupted_fraction_std=float(frac.std()),
        liquidity_loss_mean=float(loss.mean()),
        liquidity_loss_std=float(loss.std()),
        per_bank_default_frequency=bankrupt.mean(axis=0),
        mean_stop_step=float(stop.mean()),
        fraction_hitting_cap=float(cap.mean()),
        bankrupted_fractions=frac,
        liquidity_losses=loss,
        stop_steps=stop,
    )


def feature_risk_correlation(default_frequency, feature) -> float:
    """Pearson correlation between per-bank default frequency and a bank feature."""
    x = np.asarray(default_frequency, dtype=float)
    y = np.asarray(feature, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("series must be 1-d and of equal length")
    if x.size < 3:
        raise ValueError("need at least 3 banks")
    dx, dy = x - x.mean(), y - y.mean()
    sxx, syy = np.dot(dx, dx), np.dot(dy, dy)
    if sxx == 0 or syy == 0:
        raise ValueError("correlation undefined for a constant series")
    return float(np.dot(dx, dy) / math.sqrt(sxx * syy))


# ---------------------------------------------------------------------------
# well-mixed SIR reference

@dataclass(frozen=True)
class SIRParams:
    lam: float
    mu: float
    s0: float
    i0: float
    r0: float = 0.0

    def __post_init__(self):
        if min(self.lam, self.mu, self.s0, self.i0, self.r0) < 0:
            raise ValueError("SIR parameters and densities must be nonnegative")
        if abs(self.s0 + self.i0 + self.r0 - 1.0) > 1e-12:
            raise ValueError("initial densities must sum to 1")


def sir_meanfield(params: SIRParams, t_end: float, dt: float) -> tuple[np.ndarray, np.ndarray]:
    """Integrate the well-mixed SIR equations with classical RK4.

    Returns the time grid and an array of ``(s, i, r)`` rows. The last
    step is shortened so the grid ends exactly at ``t_end``.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if t_end < 0:
        raise ValueError("t_end must be nonnegative")
    lam, mu = params.lam, params.mu

    def f(y):
        s, i, _ = y
        inf = lam * s * i
        rem = mu * i
        return np.array([-inf, inf - rem, rem])

    n_full = int(math.floor(t_end / dt + 1e-12))
    times = [0.0]
    y = np.array([params.s0, params.i0, params.r0], dtype=float)
    traj = [y.copy()]
    steps = [dt] * n_full
    rest = t_end - n_full * dt
    if rest > 1e-12 * max(1.0, t_end):
        steps.append(rest)
    for k, h in enumerate(steps, start=1):
        k1 = f(y)
        k2 = f(y + 0.5 * h * k1)
        k3 = f(y + 0.5 * h * k2)
        k4 = f(y + h * k3)
        y = y + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        times.append(k * dt if k <= n_full else t_end)
        traj.append(y.copy())
    return np.array(times), np.array(traj)
