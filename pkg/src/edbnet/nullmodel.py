"""Directed enhanced configuration model (DECM) null networks.

The maximum-entropy ensemble constrains every bank's expected in/out degree
and in/out strength. With per-bank parameters ``x_out, x_in, y_out, y_in``
the link probability and expected weight of the ordered pair ``(i, j)`` are

    z_ij = y_out[i] * y_in[j]
    p_ij = x_out[i] x_in[j] z_ij / (1 - z_ij + x_out[i] x_in[j] z_ij)
    <w_ij> = p_ij / (1 - z_ij)

and, given a link, the weight is geometric on {1, 2, ...} with ratio
``z_ij``. Weights are expressed in integer multiples of a money quantum.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .econostats import ks_two_sample
from .edb import SimConfig, simulate_ensemble
from .netcore import EmptyNetworkError, QuarterlyNetwork, reduce_to_wcc

log = logging.getLogger(__name__)

DEFAULT_QUANTUM = 0.1
DEFAULT_TOL = 1e-6


class ConvergenceError(RuntimeError):
    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (final residual {residual:.3e})")
        self.residual = residual


@dataclass(frozen=True)
class DECMParameters:
    bank_ids: tuple[str, ...]
    x_out: np.ndarray
    x_in: np.ndarray
    y_out: np.ndarray
    y_in: np.ndarray
    quantum: float
    residual: float = float("nan")
    iterations: int = 0
    residual_log: list[float] = field(default_factory=list, repr=False)

    @property
    def n(self) -> int:
        return self.x_out.size

    def link_probabilities(self) -> np.ndarray:
        return _probabilities(self.x_out, self.x_in, self.y_out, self.y_in)[0]

    def weight_ratios(self) -> np.ndarray:
        z = np.outer(self.y_out, self.y_in)
        np.fill_diagonal(z, 0.0)
        return z

    def expected_weights(self) -> np.ndarray:
        """Expected weights in quantum units."""
        p, z = _probabilities(self.x_out, self.x_in, self.y_out, self.y_in)
        return p / (1.0 - z)

    def expected_moments(self) -> dict[str, np.ndarray]:
        p = self.link_probabilities()
        w = self.expected_weights()
        return {
            "k_out": p.sum(axis=1), "k_in": p.sum(axis=0),
            "s_out": w.sum(axis=1), "s_in": w.sum(axis=0),
        }


def quantize(W, quantum: float = DEFAULT_QUANTUM) -> np.ndarray:
    """Integer weights in units of ``quantum``; every existing link keeps at least 1."""
    if quantum <= 0:
        raise ValueError("quantum must be positive")
    W = np.asarray(W.toarray() if sp.issparse(W) else W, dtype=float)
    Q = np.rint(W / quantum)
    Q[(W > 0) & (Q < 1)] = 1
    return Q


def observed_moments(Q: np.ndarray) -> dict[str, np.ndarray]:
    A = (Q > 0).astype(float)
    return {
        "k_out": A.sum(axis=1), "k_in": A.sum(axis=0),
        "s_out": Q.sum(axis=1), "s_in": Q.sum(axis=0),
    }


def _probabilities(xo, xi, yo, yi):
    z = np.outer(yo, yi)
    g = np.outer(xo, xi) * z
    p = g / (1.0 - z + g)
    np.fill_diagonal(p, 0.0)
    np.fill_diagonal(z, 0.0)
    return p, z


def _residual(params, obs) -> float:
    xo, xi, yo, yi = params
    p, z = _probabilities(xo, xi, yo, yi)
    w = p / (1.0 - z)
    exp = (p.sum(axis=1), p.sum(axis=0), w.sum(axis=1), w.sum(axis=0))
    tgt = (obs["k_out"], obs["k_in"], obs["s_out"], obs["s_in"])
    return max(float(np.max(np.abs(e - t) / np.maximum(t, 1.0))) for e, t in zip(exp, tgt))


def _pair_terms(theta, act_out, act_in):
    """Per-pair ``p``, ``z``, ``D = 1 - z + g z`` from log-parameters."""
    ao, ai, bo, bi = np.split(theta, 4)
    live = np.outer(act_out, act_in)
    np.fill_diagonal(live, False)
    U = np.where(live, bo[:, None] + bi[None, :], np.inf)
    A = np.where(live, ao[:, None] + ai[None, :], np.inf)
    z = np.exp(-U)
    gz = np.exp(-(A + U))
    D = 1.0 - z + gz
    p = gz / D
    return p, z, D, live


def _objective(theta, obs_vec, act_out, act_in):
    _, z, D, live = _pair_terms(theta, act_out, act_in)
    if np.any(z[live] >= 1.0):
        return np.inf
    log_z = np.where(live, np.log(np.where(live, D, 1.0)) - np.log1p(-np.where(live, z, 0.0)), 0.0)
    lin = np.dot(theta, obs_vec)
    return float(lin + log_z.sum())


def _gradient_hessian(theta, obs_vec, act_out, act_in):
    p, z, D, live = _pair_terms(theta, act_out, act_in)
    one_z = np.where(live, 1.0 - z, 1.0)
    w = p / one_z
    grad = obs_vec - np.concatenate([p.sum(1), p.sum(0), w.sum(1), w.sum(0)])
    h_aa = p * (1.0 - p)
    h_au = np.where(live, p / np.where(live, D, 1.0), 0.0)
    h_uu = np.where(live, p / (np.where(live, D, 1.0) * one_z) + p * z / one_z**2, 0.0)
    d = np.diag
    # variable order: a_out, a_in, b_out, b_in; pair (i, j) couples the
    # out-variables of i with the in-variables of j
    H = np.block([
        [d(h_aa.sum(1)), h_aa, d(h_au.sum(1)), h_au],
        [h_aa.T, d(h_aa.sum(0)), h_au.T, d(h_au.sum(0))],
        [d(h_au.sum(1)), h_au, d(h_uu.sum(1)), h_uu],
        [h_au.T, d(h_au.sum(0)), h_uu.T, d(h_uu.sum(0))],
    ])
    return grad, H


def _to_params(theta, act_out, act_in):
    ao, ai, bo, bi = np.split(theta, 4)
    xo = np.where(act_out, np.exp(-ao), 0.0)
    xi = np.where(act_in, np.exp(-ai), 0.0)
    yo = np.where(act_out, np.exp(-bo), 0.0)
    yi = np.where(act_in, np.exp(-bi), 0.0)
    return xo, xi, yo, yi


def _initial_theta(obs, n):
    L = obs["k_out"].sum()
    S = obs["s_out"].sum()
    scale = np.sqrt(max(L, 1.0))
    xo = np.maximum(obs["k_out"], 0.5) / scale
    xi = np.maximum(obs["k_in"], 0.5) / scale
    z_bar = min(max(1.0 - L / max(S, 1.0), 1e-3), 0.999)
    y = 0.9 * np.sqrt(z_bar)
    return np.concatenate([-np.log(xo), -np.log(xi), np.full(n, -np.log(y)), np.full(n, -np.log(y))])


def _check_pathological(obs, n):
    problems = []
    for name, k in (("out", obs["k_out"]), ("in", obs["k_in"])):
        for i in np.flatnonzero(k >= n - 1):
            problems.append(f"bank {i} has {name}-degree N-1")
    return problems


def solve_decm(
    net,
    tol: float = DEFAULT_TOL,
    max_iter: int = 500,
    quantum: float = DEFAULT_QUANTUM,
) -> DECMParameters:
    """Fit DECM parameters reproducing a network's degrees and quantized strengths.

    The parameters maximise the ensemble likelihood, which is concave in
    ``(-log x, -log y)``. Newton steps are taken with a backtracking line
    search that keeps every ``y_out[i] * y_in[j] < 1`` and decreases the
    negative log-likelihood. Banks with zero in- (out-) degree get
    ``x_in = y_in = 0`` (``x_out = y_out = 0``).

    Raises
    ------
    ConvergenceError
        If the max relative residual ``|expected - observed| / max(observed, 1)``
        is still above ``tol`` after ``max_iter`` Newton steps. Banks with
        degree ``N-1``, whose parameters diverge, are listed.
    """
    if isinstance(net, QuarterlyNetwork):
        ids, W = net.bank_ids, net.dense()
    else:
        W = np.asarray(net, dtype=float)
        ids = tuple(str(i) for i in range(W.shape[0]))
    Q = quantize(W, quantum)
    n = Q.shape[0]
    obs = observed_moments(Q)
    if np.any(obs["k_out"] + obs["k_in"] == 0):
        raise ValueError("every bank needs at least one link")
    act_out = obs["k_out"] > 0
    act_in = obs["k_in"] > 0
    obs_vec = np.concatenate([obs["k_out"], obs["k_in"], obs["s_out"], obs["s_in"]])
    active = np.concatenate([act_out, act_in, act_out, act_in])

    theta = _initial_theta(obs, n)
    f = _objective(theta, obs_vec, act_out, act_in)
    res = _residual(_to_params(theta, act_out, act_in), obs)
    history = [res]
    it = 0
    while res >= tol and it < max_iter:
        it += 1
        grad, H = _gradient_hessian(theta, obs_vec, act_out, act_in)
        g = grad[active]
        Hs = H[np.ix_(active, active)]
        ridge = 1e-12 * max(1.0, float(np.max(np.diag(Hs))))
        try:
            step = -np.linalg.solve(Hs + ridge * np.eye(Hs.shape[0]), g)
        except np.linalg.LinAlgError:
            step = -g
        direction = np.zeros_like(theta)
        direction[active] = step
        slope = float(g @ step)
        if slope >= 0:
            direction[active] = -g
            slope = -float(g @ g)
        t = 1.0
        while True:
            trial = theta + t * direction
            f_trial = _objective(trial, obs_vec, act_out, act_in)
            if np.isfinite(f_trial) and f_trial <= f + 1e-4 * t * slope:
                break
            t *= 0.5
            if t < 1e-14:
                break
        if t < 1e-14:
            break
        theta, f = trial, f_trial
        res = _residual(_to_params(theta, act_out, act_in), obs)
        history.append(res)
        log.debug("DECM iter %d residual %.3e step %.3g", it, res, t)
    if res >= tol:
        bad = _check_pathological(obs, n)
        msg = f"DECM solver did not converge in {it} iterations"
        if bad:
            msg += "; pathological: " + ", ".join(bad)
        raise ConvergenceError(msg, res)
    xo, xi, yo, yi = _to_params(theta, act_out, act_in)
    return DECMParameters(ids, xo, xi, yo, yi, quantum, res, it, history)


def sample_null_weights(params: DECMParameters, rng: np.random.Generator) -> np.ndarray:
    """One dense weight matrix in money units, without component reduction."""
    p = params.link_probabilities()
    z = params.weight_ratios()
    n = params.n
    u = rng.random((n, n))
    links = u < p
    np.fill_diagonal(links, False)
    w = np.zeros((n, n))
    q = 1.0 - z[links]
    w[links] = rng.geometric(np.clip(q, 1e-300, 1.0))
    return w * params.quantum


def sample_null(params: DECMParameters, rng_seed, quarter: str = "") -> QuarterlyNetwork:
    """Draw a null network and restrict it to its largest weakly connected component."""
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    W = sample_null_weights(params, rng)
    return reduce_to_wcc(quarter, params.bank_ids, W)


def null_networks(params: DECMParameters, n_null: int, rng_seed, quarter: str = "") -> list[QuarterlyNetwork]:
    """``n_null`` seeded draws, skipping samples with fewer than two connected banks.

    Draw ``k`` uses the ``k``-th child of ``SeedSequence(rng_seed)``, so the
    same seed always yields the same list.
    """
    out = []
    for k, child in enumerate(np.random.SeedSequence(rng_seed).spawn(n_null)):
        try:
            null_net = sample_null(params, np.random.default_rng(child), quarter=quarter)
        except EmptyNetworkError:
            log.warning("null sample %d has no links; skipped", k)
            continue
        if null_net.n_banks >= 2:
            out.append(null_net)
    return out


@dataclass
class NullTestReport:
    ks_statistic: float
    p_value: float
    observed: np.ndarray = field(repr=False)
    null: np.ndarray = field(repr=False)
    n_null_networks: int = 0
    solver_residual: float = float("nan")
    solver_iterations: int = 0
    quantum: float = DEFAULT_QUANTUM
    residual_log: list = field(default_factory=list)

    def as_dict(self, include_samples: bool = True) -> dict:
        out = {
            "ks_statistic": self.ks_statistic,
            "p_value": self.p_value,
            "n_observed": int(self.observed.size),
            "n_null": int(self.null.size),
            "n_null_networks": self.n_null_networks,
            "observed_mean": float(self.observed.mean()),
            "null_mean": float(self.null.mean()),
            "solver_residual": self.solver_residual,
            "solver_iterations": self.solver_iterations,
            "quantum": self.quantum,
            "solver_residual_log": [float(r) for r in self.residual_log],
        }
        if include_samples:
            out["observed_bankrupted_fractions"] = self.observed.tolist()
            out["null_bankrupted_fractions"] = self.null.tolist()
        return out


def null_risk_test(
    net: QuarterlyNetwork,
    config: SimConfig,
    n_null: int = 100,
    rng_seed: int = 0,
    quantum: float = DEFAULT_QUANTUM,
    tol: float = DEFAULT_TOL,
    workers: int = 1,
) -> NullTestReport:
    """KS comparison of simulated systemic risk on a network and on its DECM nulls.

    The observed sample holds the per-realization bankrupted fractions on
    ``net``; the null sample pools them over ``n_null`` sampled networks,
    each simulated with ``config``.
    """
    params = solve_decm(net, tol=tol, quantum=quantum)
    observed = simulate_ensemble(net, config, workers=workers).bankrupted_fractions
    pooled = [
        simulate_ensemble(null_net, config, workers=workers).bankrupted_fractions
        for null_net in null_networks(params, n_null, rng_seed, quarter=net.quarter)
    ]
    if not pooled:
        raise RuntimeError("no usable null networks sampled")
    null = np.concatenate(pooled)
    D, p = ks_two_sample(observed, null)
    return NullTestReport(
        D, p, observed, null, len(pooled), params.residual, params.iterations, quantum,
        list(params.residual_log),
    )
