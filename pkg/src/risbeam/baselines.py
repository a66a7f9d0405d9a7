"""
PSO and continuous ACO (ACO_R) baselines over the same search space as AFSA.

Both operate on a real vector ``x = [Re w, Im w, phi]`` of length 2M + N.
After every move the vector is pushed through the AFSA projection (beam
renormalized to power P, RIS phases clamped to [0, 2 pi]) and re-encoded, so
all three optimizers probe exactly the same set of beam pairs.

Constraint handling uses the usual feasibility rule: a feasible candidate
beats an infeasible one, two feasible candidates compare by echo power, two
infeasible ones by how far their user power lies outside the window.
"""

from dataclasses import dataclass, replace

import numpy as np

from .afsa import TWO_PI, TraceRecord, TrainingResult, decode, settle
from .errors import InvalidInputError


@dataclass(frozen=True)
class PSOParams:
    swarm_size: int = 20
    K: int = 100
    inertia: float = 0.72
    cognitive: float = 1.49
    social: float = 1.49
    velocity_clamp: float = 0.2
    rng_seed: int = 0
    eta_min: float = 0.0
    eta_max: float = np.inf

    def __post_init__(self):
        if self.swarm_size < 1 or self.K < 1:
            raise InvalidInputError("swarm_size and K must be >= 1")
        if min(self.inertia, self.cognitive, self.social) <= 0:
            raise InvalidInputError("PSO coefficients must be > 0")
        if not 0 < self.velocity_clamp <= 1:
            raise InvalidInputError("velocity_clamp must be in (0, 1]")
        if not 0 <= self.eta_min <= self.eta_max:
            raise InvalidInputError("need 0 <= eta_min <= eta_max")

    @property
    def budget(self):
        return self.swarm_size * self.K

    def with_budget(self, evals):
        """Same settings, with K chosen so the echo-probe count is closest to ``evals``."""
        return replace(self, K=max(1, int(round(evals / self.swarm_size))))


@dataclass(frozen=True)
class ACOParams:
    archive_size: int = 50
    ants: int = 20
    K: int = 100
    q: float = 0.1
    xi_ratio: float = 0.85
    rng_seed: int = 0
    eta_min: float = 0.0
    eta_max: float = np.inf

    def __post_init__(self):
        if not self.archive_size >= self.ants >= 1:
            raise InvalidInputError("need archive_size >= ants >= 1")
        if self.K < 1:
            raise InvalidInputError("K must be >= 1")
        if not (self.q > 0 and self.xi_ratio > 0):
            raise InvalidInputError("q and xi_ratio must be > 0")
        if not 0 <= self.eta_min <= self.eta_max:
            raise InvalidInputError("need 0 <= eta_min <= eta_max")

    @property
    def budget(self):
        return self.archive_size + self.ants * (self.K - 1)

    def with_budget(self, evals):
        """Same settings, with K chosen so the echo-probe count is closest to
        ``evals``. Budgets below one archive plus one generation shrink the
        archive (and if needed the colony) to fit."""
        evals = int(evals)
        archive, ants = self.archive_size, self.ants
        if evals < archive + ants:
            ants = max(1, min(ants, evals // 2))
            archive = max(ants, evals - ants)
        k = 1 + int(round((evals - archive) / ants))
        return replace(self, archive_size=archive, ants=ants, K=max(1, k))


def encode(position):
    w = position.w
    return np.concatenate([w.real, w.imag, position.phi])


def to_position(x, M, P):
    return settle(x[:M] + 1j * x[M : 2 * M], x[2 * M :], P)


def _bounds(M, N, P):
    half = np.sqrt(P)
    lo = np.concatenate([np.full(2 * M, -half), np.zeros(N)])
    hi = np.concatenate([np.full(2 * M, half), np.full(N, TWO_PI)])
    return lo, hi


def _random_x(rng, M, N, P):
    beta = rng.uniform(0.0, np.sqrt(P), M)
    theta = rng.uniform(-np.pi, np.pi, M)
    pos = settle(beta * np.exp(1j * theta), rng.uniform(0.0, TWO_PI, N), P)
    return encode(pos), pos


def rule_key(F, f, eta_min, eta_max):
    """Sort key for the feasibility rule; larger is better."""
    if eta_min <= f <= eta_max:
        return (1, F)
    return (0, -max(eta_min - f, f - eta_max))


class _Tracker:
    def __init__(self, params, M, P):
        self.params = params
        self.M = M
        self.P = P
        self.key = (-1, 0.0)
        self.pos = None
        self.F = -np.inf
        self.f = np.nan
        self.trace = []

    def offer(self, pos, F, f):
        key = rule_key(F, f, self.params.eta_min, self.params.eta_max)
        if key > self.key:
            self.key, self.pos, self.F, self.f = key, pos, F, f
        return key

    @property
    def feasible(self):
        return self.key[0] == 1

    def record(self, n_feasible):
        self.trace.append(TraceRecord(self.F if self.feasible else -np.inf, n_feasible, None))

    def result(self, oracle, name):
        return TrainingResult(
            best_beam=decode(self.pos, self.P),
            best_position=self.pos,
            best_fitness=self.F,
            best_comm_power=self.f,
            trace=self.trace,
            echo_evals=oracle.eval_count_echo,
            user_evals=oracle.eval_count_user,
            never_feasible=not self.feasible,
            algorithm=name,
        )


def _oracle_for(scenario, oracle):
    if oracle is None:
        from .oracle import FeedbackOracle

        oracle = FeedbackOracle(scenario)
    if oracle.scenario != scenario:
        raise InvalidInputError("oracle was built for a different scenario")
    return oracle


def run_pso(scenario, params, oracle=None):
    """Global-best PSO; one probe per particle per iteration."""
    oracle = _oracle_for(scenario, oracle)
    M, N, P = oracle.M, oracle.N, oracle.P
    rng = np.random.default_rng(params.rng_seed)
    lo, hi = _bounds(M, N, P)
    vmax = params.velocity_clamp * (hi - lo)
    best = _Tracker(params, M, P)
    eta = (params.eta_min, params.eta_max)

    n = params.swarm_size
    x = np.empty((n, 2 * M + N))
    v = np.zeros_like(x)
    pbest_x = np.empty_like(x)
    pbest_key = [None] * n
    n_feas = 0
    for i in range(n):
        x[i], pos = _random_x(rng, M, N, P)
        F, f = oracle.measure(decode(pos, P))
        pbest_x[i] = x[i]
        pbest_key[i] = best.offer(pos, F, f)
        n_feas += pbest_key[i][0]
    best.record(n_feas)

    for _ in range(params.K - 1):
        g = encode(best.pos)
        r1 = rng.uniform(size=x.shape)
        r2 = rng.uniform(size=x.shape)
        v = params.inertia * v + params.cognitive * r1 * (pbest_x - x) + params.social * r2 * (g - x)
        v = np.clip(v, -vmax, vmax)
        n_feas = 0
        for i in range(n):
            pos = to_position(x[i] + v[i], M, P)
            x[i] = encode(pos)
            F, f = oracle.measure(decode(pos, P))
            key = rule_key(F, f, *eta)
            n_feas += key[0]
            if key > pbest_key[i]:
                pbest_key[i] = key
                pbest_x[i] = x[i]
            best.offer(pos, F, f)
        best.record(n_feas)
    return best.result(oracle, "pso")


def run_aco(scenario, params, oracle=None):
    """ACO_R: ranked solution archive sampled with per-dimension Gaussian kernels."""
    oracle = _oracle_for(scenario, oracle)
    M, N, P = oracle.M, oracle.N, oracle.P
    rng = np.random.default_rng(params.rng_seed)
    best = _Tracker(params, M, P)
    eta = (params.eta_min, params.eta_max)
    k = params.archive_size

    archive = []  # (key, x)
    n_feas = 0
    for _ in range(k):
        x, pos = _random_x(rng, M, N, P)
        F, f = oracle.measure(decode(pos, P))
        key = best.offer(pos, F, f)
        n_feas += key[0]
        archive.append((key, x))
    best.record(n_feas)

    ranks = np.arange(k)
    weights = np.exp(-(ranks**2) / (2 * (params.q * k) ** 2)) / (params.q * k * np.sqrt(2 * np.pi))
    probs = weights / weights.sum()

    for _ in range(params.K - 1):
        # stable sort keeps insertion order among equal keys
        archive.sort(key=lambda item: item[0], reverse=True)
        X = np.array([x for _, x in archive])
        new = []
        n_feas = 0
        for _ in range(params.ants):
            l = rng.choice(k, p=probs)
            spread = params.xi_ratio * np.abs(X - X[l]).sum(axis=0) / max(k - 1, 1)
            sample = X[l] + spread * rng.standard_normal(X.shape[1])
            pos = to_position(sample, M, P)
            F, f = oracle.measure(decode(pos, P))
            key = best.offer(pos, F, f)
            n_feas += key[0]
            new.append((key, encode(pos)))
        archive = sorted(archive + new, key=lambda item: item[0], reverse=True)[:k]
        best.record(n_feas)
    return best.result(oracle, "aco")
