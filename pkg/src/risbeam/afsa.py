"""
Improved artificial fish swarm (AFSA) beam training.

Each artificial fish (AF) is one candidate beam pair: an active beam
``w = beta * exp(j theta)`` at the DFBS and a vector of RIS phases ``phi``.
The swarm is evaluated only through the feedback oracle (echo power as
fitness, user power as the constraint signal), one probe per candidate.

Per sub-block the swarm falls into one of three cases according to how many
AFs satisfied ``eta_min <= user power <= eta_max`` in the previous sub-block:

* A - all feasible: every AF runs clustering and rear-chasing (falling back to
  foraging) and keeps the better of the two results.
* B - some feasible: infeasible AFs step towards the best feasible AF, the
  feasible ones behave as in case A among themselves.
* C - none feasible: every AF steps towards the AF whose user power is closest
  to the feasible window, and that AF forages.

The active part of a position is perturbed and stepped as a complex vector;
the RIS phases are handled as a separate real vector with their own vision,
step and correction factor.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ContractViolationError, InvalidInputError
from .oracle import BeamPair

TWO_PI = 2 * np.pi


class _NoImprovement:
    def __repr__(self):
        return "NoImprovement"

    def __bool__(self):
        return False


NoImprovement = _NoImprovement()


@dataclass(frozen=True)
class AFSAParams:
    """Swarm hyperparameters.

    ``None`` for a step, vision or correction factor selects the
    scenario-dependent default: ``chi1 = 0.3 sqrt(P)``, ``nu1 = 1.5 sqrt(P)``,
    ``sigma1 = sqrt(2M)``, ``sigma2 = sqrt(N)``. Call :meth:`resolve` to fill
    them in.
    """

    S: int = 20
    K: int = 100
    chi1: float = None
    chi2: float = 0.4
    nu1: float = None
    nu2: float = 2.0
    sigma1: float = None
    sigma2: float = None
    delta: float = 0.75
    T_max: int = 5
    eta_min: float = 0.0
    eta_max: float = np.inf
    rng_seed: int = 0

    def __post_init__(self):
        if self.S < 2 or self.K < 2:
            raise InvalidInputError("S and K must be >= 2")
        if self.T_max < 1:
            raise InvalidInputError("T_max must be >= 1")
        if not self.delta > 0:
            raise InvalidInputError("delta must be > 0")
        for name in ("chi1", "chi2", "nu1", "nu2", "sigma1", "sigma2"):
            value = getattr(self, name)
            if value is not None and not value > 0:
                raise InvalidInputError(f"{name} must be > 0")
        if not 0 <= self.eta_min <= self.eta_max:
            raise InvalidInputError("need 0 <= eta_min <= eta_max")

    def resolve(self, M, N, P):
        sqrt_p = np.sqrt(P)
        return replace(
            self,
            chi1=0.3 * sqrt_p if self.chi1 is None else self.chi1,
            nu1=1.5 * sqrt_p if self.nu1 is None else self.nu1,
            sigma1=np.sqrt(2 * M) if self.sigma1 is None else self.sigma1,
            sigma2=np.sqrt(N) if self.sigma2 is None else self.sigma2,
        )


@dataclass(frozen=True, eq=False)
class AFPosition:
    """Amplitudes ``beta`` in [0, sqrt P], phases ``theta`` in [-pi, pi),
    RIS phases ``phi`` in [0, 2 pi]."""

    beta: np.ndarray
    theta: np.ndarray
    phi: np.ndarray

    @property
    def w(self):
        return self.beta * np.exp(1j * self.theta)

    @classmethod
    def from_complex(cls, w, phi):
        return cls(np.abs(w), wrap_phase(np.angle(w)), np.asarray(phi, dtype=float))

    def copy(self):
        return AFPosition(self.beta.copy(), self.theta.copy(), self.phi.copy())


@dataclass(frozen=True)
class TraceRecord:
    global_fitness: float
    feasible_count: int
    case_label: str = None


@dataclass
class TrainingResult:
    best_beam: BeamPair
    best_position: AFPosition
    best_fitness: float
    best_comm_power: float
    trace: list
    echo_evals: int
    user_evals: int
    never_feasible: bool = False
    algorithm: str = "afsa"

    @property
    def fitness_trace(self):
        return np.array([rec.global_fitness for rec in self.trace])


@dataclass
class SwarmState:
    positions: list
    fitness: np.ndarray
    comm_power: np.ndarray
    feasible: np.ndarray
    rng: np.random.Generator
    global_opt: AFPosition = None
    global_fitness: float = -np.inf
    global_comm_power: float = np.nan
    sub_block_index: int = 1
    trace: list = field(default_factory=list)
    # every (position, F, f) probed during the current sub-block
    _candidates: list = field(default_factory=list, repr=False)

    @property
    def S(self):
        return len(self.positions)

    @property
    def feasible_indices(self):
        return np.flatnonzero(self.feasible)


def wrap_phase(theta):
    """Wrap into [-pi, pi)."""
    return np.mod(np.asarray(theta, dtype=float) + np.pi, TWO_PI) - np.pi


def classify(n_feasible, S):
    if n_feasible == S:
        return "A"
    if n_feasible == 0:
        return "C"
    return "B"


def _normalize_w(w, P):
    norm = np.linalg.norm(w)
    if norm == 0.0:
        return np.full(w.shape, np.sqrt(P / w.size), dtype=complex)
    return w * (np.sqrt(P) / norm)


def decode(position, P):
    """Map a position to a beam pair with ``||w||^2 = P`` and ``|xi| = 1``."""
    beta = np.asarray(position.beta, dtype=float)
    if not np.any(beta > 0):
        beta = np.full(beta.shape, np.sqrt(P / beta.size))
    w = beta * np.exp(1j * np.asarray(position.theta, dtype=float))
    return BeamPair(_normalize_w(w, P), np.exp(1j * np.asarray(position.phi, dtype=float)))


def project_bounds(position, P):
    """Clamp amplitudes to [0, sqrt P] and RIS phases to [0, 2 pi]; wrap theta."""
    return AFPosition(
        np.clip(position.beta, 0.0, np.sqrt(P)),
        wrap_phase(position.theta),
        np.clip(position.phi, 0.0, TWO_PI),
    )


def settle(w, phi, P):
    """Project raw (complex w, phi) coordinates and renormalize the beam.

    This is the state every AF is kept in between updates, so decoding a
    settled position never changes it.
    """
    w = np.asarray(w, dtype=complex)
    beta = np.minimum(np.abs(w), np.sqrt(P))
    theta = wrap_phase(np.angle(w))
    if not np.any(beta > 0):
        beta = np.full(beta.shape, np.sqrt(P / beta.size))
    w = _normalize_w(beta * np.exp(1j * theta), P)
    return AFPosition(
        np.minimum(np.abs(w), np.sqrt(P)),
        wrap_phase(np.angle(w)),
        np.clip(np.asarray(phi, dtype=float), 0.0, TWO_PI),
    )


def distance(a, b):
    """(active, passive) distances: ``||w_a - w_b||`` and ``||phi_a - phi_b||``."""
    return float(np.linalg.norm(a.w - b.w)), float(np.linalg.norm(a.phi - b.phi))


def _probe(position, params, oracle, P):
    return oracle.measure(decode(position, P))


def _is_feasible(f, params):
    return params.eta_min <= f <= params.eta_max


def _offer(state, position, F, f, params):
    if _is_feasible(f, params) and F > state.global_fitness:
        state.global_opt = position
        state.global_fitness = F
        state.global_comm_power = f


def _rand_complex(rng, size):
    return rng.uniform(-1.0, 1.0, size) + 1j * rng.uniform(-1.0, 1.0, size)


def random_move(position, params, rng, P):
    """Unconditional jitter of both parts."""
    w = position.w + params.nu1 / params.sigma1 * _rand_complex(rng, position.w.size)
    phi = position.phi + params.nu2 / params.sigma2 * rng.uniform(-1.0, 1.0, position.phi.size)
    return settle(w, phi, P)


def step_towards(position, target, params, rng, P):
    """Move each part one random-length step towards ``target``.

    A part whose direction is undefined (target coincides) is jittered
    instead.
    """
    w0, phi0 = position.w, position.phi
    dw = target.w - w0
    dphi = target.phi - phi0
    nw = np.linalg.norm(dw)
    nphi = np.linalg.norm(dphi)
    r1, r2 = rng.uniform(0.0, 1.0, 2)
    if nw > 0:
        w = w0 + dw / nw * params.chi1 * r1
    else:
        w = w0 + params.nu1 / params.sigma1 * _rand_complex(rng, w0.size)
    if nphi > 0:
        phi = phi0 + dphi / nphi * params.chi2 * r2
    else:
        phi = phi0 + params.nu2 / params.sigma2 * rng.uniform(-1.0, 1.0, phi0.size)
    return settle(w, phi, P)


def _partners(state, i, params, pool):
    me = state.positions[i]
    found = []
    for j in pool:
        if j == i:
            continue
        d_act, d_pas = distance(me, state.positions[j])
        if d_act < params.nu1 and d_pas < params.nu2:
            found.append(j)
    return found


def _pool(state, pool):
    return range(state.S) if pool is None else pool


def init_swarm(params, oracle):
    """Random initial swarm, evaluated once per AF."""
    M, N, P = oracle.M, oracle.N, oracle.P
    params = params.resolve(M, N, P)
    rng = np.random.default_rng(params.rng_seed)
    positions, fitness, comm = [], [], []
    for _ in range(params.S):
        beta = rng.uniform(0.0, np.sqrt(P), M)
        theta = rng.uniform(-np.pi, np.pi, M)
        phi = rng.uniform(0.0, TWO_PI, N)
        pos = settle(beta * np.exp(1j * theta), phi, P)
        F, f = _probe(pos, params, oracle, P)
        positions.append(pos)
        fitness.append(F)
        comm.append(f)
    state = SwarmState(
        positions=positions,
        fitness=np.array(fitness),
        comm_power=np.array(comm),
        feasible=np.array([_is_feasible(f, params) for f in comm]),
        rng=rng,
    )
    feas = state.feasible_indices
    if feas.size:
        best = int(feas[np.argmax(state.fitness[feas])])
        state.global_opt = positions[best]
        state.global_fitness = float(state.fitness[best])
        state.global_comm_power = float(state.comm_power[best])
    return state


def foraging(state, i, params, oracle):
    """Trial-and-step local search for AF ``i`` (at most ``T_max`` probes)."""
    P = oracle.P
    rng = state.rng
    me = state.positions[i]
    F_i = state.fitness[i]
    for _ in range(params.T_max):
        visual = random_move(me, params, rng, P)
        F_e, f_e = _probe(visual, params, oracle, P)
        state._candidates.append((visual, F_e, f_e))
        if F_e > F_i:
            return step_towards(me, visual, params, rng, P)
    return random_move(me, params, rng, P)


def clustering(state, i, params, oracle, pool=None):
    """Step towards the centre of the partners in vision, if it is worth it."""
    P = oracle.P
    partners = _partners(state, i, params, _pool(state, pool))
    n_f = len(partners)
    if n_f == 0:
        return NoImprovement
    w_c = np.mean([state.positions[j].w for j in partners], axis=0)
    phi_c = np.mean([state.positions[j].phi for j in partners], axis=0)
    centre = settle(w_c, phi_c, P)
    F_c, f_c = _probe(centre, params, oracle, P)
    state._candidates.append((centre, F_c, f_c))
    if F_c / n_f > params.delta * state.fitness[i]:
        return step_towards(state.positions[i], centre, params, state.rng, P)
    return NoImprovement


def rear_chasing(state, i, params, oracle, pool=None):
    """Step towards the fittest partner in vision, if it is worth it."""
    partners = _partners(state, i, params, _pool(state, pool))
    n_f = len(partners)
    if n_f == 0:
        return NoImprovement
    best = partners[int(np.argmax(state.fitness[partners]))]
    if state.fitness[best] / n_f > params.delta * state.fitness[i]:
        return step_towards(state.positions[i], state.positions[best], params, state.rng, oracle.P)
    return NoImprovement


def _behave(state, i, params, oracle, pool):
    """Clustering vs rear-chasing (each falling back to foraging), keep the fitter."""
    P = oracle.P
    cand1 = clustering(state, i, params, oracle, pool)
    cand2 = rear_chasing(state, i, params, oracle, pool)
    if not cand1 or not cand2:
        foraged = foraging(state, i, params, oracle)
        cand1 = cand1 or foraged
        cand2 = cand2 or foraged
    F1, f1 = _probe(cand1, params, oracle, P)
    state._candidates.append((cand1, F1, f1))
    if cand2 is cand1:
        return cand1, F1, f1
    F2, f2 = _probe(cand2, params, oracle, P)
    state._candidates.append((cand2, F2, f2))
    if F2 > F1:
        return cand2, F2, f2
    return cand1, F1, f1


def _commit(state, new, params, record_global, label, n_feasible):
    state.positions = [pos for pos, _, _ in new]
    state.fitness = np.array([F for _, F, _ in new])
    state.comm_power = np.array([f for _, _, f in new])
    state.feasible = np.array([_is_feasible(f, params) for f in state.comm_power])
    if record_global:
        for pos, F, f in state._candidates:
            _offer(state, pos, F, f, params)
    state._candidates = []
    state.sub_block_index += 1
    state.trace.append(TraceRecord(state.global_fitness, n_feasible, label))
    return state


def _begin(state):
    state._candidates = []


def case_a_step(state, params, oracle):
    n = int(state.feasible.sum())
    if n != state.S:
        raise ContractViolationError("case A needs every AF feasible")
    _begin(state)
    for i in range(state.S):
        _offer(state, state.positions[i], state.fitness[i], state.comm_power[i], params)
    new = [_behave(state, i, params, oracle, None) for i in range(state.S)]
    return _commit(state, new, params, True, "A", n)


def select_target_case_b(state):
    feas = state.feasible_indices
    if feas.size == 0 or feas.size == state.S:
        raise ContractViolationError("case B target needs 0 < |R| < S")
    if feas.size == 1:
        return int(feas[0])
    return int(feas[np.argmax(state.fitness[feas])])


def case_b_step(state, params, oracle):
    n = int(state.feasible.sum())
    target = select_target_case_b(state)
    P = oracle.P
    _begin(state)
    if state.fitness[target] >= state.global_fitness:
        state.global_opt = state.positions[target]
        state.global_fitness = float(state.fitness[target])
        state.global_comm_power = float(state.comm_power[target])
    pool = [int(j) for j in state.feasible_indices]
    goal = state.positions[target]
    new = []
    for i in range(state.S):
        if state.feasible[i]:
            new.append(_behave(state, i, params, oracle, pool))
        else:
            pos = step_towards(state.positions[i], goal, params, state.rng, P)
            F, f = _probe(pos, params, oracle, P)
            state._candidates.append((pos, F, f))
            new.append((pos, F, f))
    return _commit(state, new, params, True, "B", n)


def select_target_case_c(state, params):
    """AF whose user power is closest to the window, over the whole swarm."""
    f = state.comm_power
    if f.max() < params.eta_min:
        return int(np.argmax(f))
    if f.min() > params.eta_max:
        return int(np.argmin(f))
    gap = np.minimum(np.abs(f - params.eta_min), np.abs(f - params.eta_max))
    return int(np.argmin(gap))


def case_c_step(state, params, oracle):
    n = int(state.feasible.sum())
    if n != 0:
        raise ContractViolationError("case C needs an all-infeasible swarm")
    P = oracle.P
    target = select_target_case_c(state, params)
    goal = state.positions[target]
    _begin(state)
    new = []
    for i in range(state.S):
        if i == target:
            pos = foraging(state, i, params, oracle)
        else:
            pos = step_towards(state.positions[i], goal, params, state.rng, P)
        F, f = _probe(pos, params, oracle, P)
        new.append((pos, F, f))
    return _commit(state, new, params, False, "C", n)


_CASES = {"A": case_a_step, "B": case_b_step, "C": case_c_step}


def run_training(scenario, params, oracle=None):
    """Full training period: initial swarm plus ``K - 1`` sub-block updates."""
    if oracle is None:
        from .oracle import FeedbackOracle

        oracle = FeedbackOracle(scenario)
    if oracle.scenario != scenario:
        raise InvalidInputError("oracle was built for a different scenario")
    P = oracle.P
    params = params.resolve(oracle.M, oracle.N, P)
    state = init_swarm(params, oracle)
    n0 = int(state.feasible.sum())
    state.trace.append(TraceRecord(state.global_fitness, n0, classify(n0, state.S)))
    for _ in range(params.K - 1):
        label = classify(int(state.feasible.sum()), state.S)
        _CASES[label](state, params, oracle)

    never_feasible = state.global_opt is None
    if never_feasible:
        target = select_target_case_c(state, params)
        best = state.positions[target]
        best_F, best_f = float(state.fitness[target]), float(state.comm_power[target])
    else:
        best, best_F, best_f = state.global_opt, state.global_fitness, state.global_comm_power
    return TrainingResult(
        best_beam=decode(best, P),
        best_position=best,
        best_fitness=best_F,
        best_comm_power=best_f,
        trace=list(state.trace),
        echo_evals=oracle.eval_count_echo,
        user_evals=oracle.eval_count_user,
        never_feasible=never_feasible,
        algorithm="afsa",
    )
