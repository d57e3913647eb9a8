"""Exhaustive and Monte Carlo verifiers for the cache-restricted model.

The lemma checks enumerate every permutation of a small ``n`` (the caps
below keep each run to seconds) and report the first violation found.
Enumeration is split by the value of pi(1); partial reports merge.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from scipy.stats import binomtest

from .constructions import LayerProgram, LookupLayer, build_serial_program
from .controllers import (
    LOCAL_NAMES,
    OBLIVIOUS_NAMES,
    FixedController,
    LeakyController,
    RandomController,
    StageGame,
    make_controller,
    run_stage_game,
)
from .errors import InsufficientSamples, InvalidParameter, InvalidTarget
from .qengine import ModelConfig, _digits, _value, forward
from .rng import SplitMix64, derive_seed
from .task import (
    Permutation,
    all_permutations,
    chain,
    cycle_of_one,
    random_permutation,
    windows,
)

MAX_N_REACH = 6
MAX_N_TRACE = 5
MAX_N_ADVERSARY = 6
MAX_N_EXACT = 7

ZOO_SEED = 12345


@dataclass
class VerificationReport:
    lemma: str
    space: str
    checked: int = 0
    violations: int = 0
    witness: dict | None = None
    stats: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.checked > 0 and self.violations == 0

    def record(self, ok: bool, **witness) -> None:
        self.checked += 1
        if not ok:
            self.violations += 1
            if self.witness is None:
                self.witness = witness

    def merge(self, other: "VerificationReport") -> "VerificationReport":
        out = VerificationReport(self.lemma, self.space, self.checked + other.checked,
                                 self.violations + other.violations,
                                 self.witness if self.witness is not None else other.witness)
        for key in set(self.stats) | set(other.stats):
            a, b = self.stats.get(key), other.stats.get(key)
            out.stats[key] = b if a is None else a if b is None else max(a, b)
        return out

    def to_json(self) -> str:
        return json.dumps({
            "lemma": self.lemma, "space": self.space, "checked": self.checked,
            "violations": self.violations, "passed": self.passed,
            "witness": self.witness, "stats": self.stats,
        }, default=str, sort_keys=True)


def permutations_by_first(n: int) -> list[list[Permutation]]:
    """S_n split into n blocks by the value of pi(1)."""
    blocks = [[] for _ in range(n)]
    for pi in all_permutations(n):
        blocks[pi.map[0] - 1].append(pi)
    return blocks


def layer_factory(name: str, s: int) -> Callable:
    """Controller factory for the layer engine; seeds are fixed so that
    randomized oblivious controllers are deterministic algorithms."""
    def make(pi: Permutation):
        return make_controller(name, pi, s, seed=ZOO_SEED)
    make.name = name
    return make


def default_layer_zoo(s: int, include_oracle: bool = True) -> list[Callable]:
    names = list(LOCAL_NAMES) + (["oracle"] if include_oracle else [])
    return [layer_factory(nm, s) for nm in names]


def _program(L: int) -> LayerProgram:
    return LayerProgram(tuple(LookupLayer() for _ in range(L)), name="serial")


# -- reachability ---------------------------------------------------------

def verify_reachability(n: int, L: int, s: int, zoo: Sequence[Callable] | None = None,
                        k: int | None = None) -> VerificationReport:
    """|support| <= 1 + L*s for every pi in S_n and every controller."""
    if n > MAX_N_REACH:
        raise InvalidParameter(f"n={n} exceeds the enumeration cap {MAX_N_REACH}")
    s = min(s, n)
    cfg = ModelConfig(n=n, k=k or max(L, 1), L=L, s=s, m=8, p=4)
    prog = _program(L)
    zoo = default_layer_zoo(s) if zoo is None else zoo
    rep = VerificationReport("reachability", f"S_{n} x {len(zoo)} controllers, L={L}, s={s}")
    largest = 0
    for block in permutations_by_first(n):
        for pi in block:
            for make in zoo:
                res = forward(prog, pi, make(pi), cfg)
                size = len(res.trace.support)
                largest = max(largest, size)
                rep.record(size <= 1 + L * s, pi=pi.map, controller=make.name,
                           trace=res.trace.to_json())
    rep.stats["max_support"] = largest
    rep.stats["bound"] = 1 + L * s
    return rep


# -- trace equivalence ----------------------------------------------------

def agreeing_permutations(pi: Permutation, positions: Iterable[int]) -> Iterable[Permutation]:
    """Every permutation equal to ``pi`` on ``positions`` (0 is ignored)."""
    fixed = sorted(j for j in positions if 1 <= j <= pi.n)
    free_pos = [i for i in range(1, pi.n + 1) if i not in set(fixed)]
    used = {pi.table[j] for j in fixed}
    free_vals = [v for v in range(1, pi.n + 1) if v not in used]
    base = list(pi.map)
    for vals in itertools.permutations(free_vals):
        img = base[:]
        for i, v in zip(free_pos, vals):
            img[i - 1] = v
        yield Permutation(tuple(img))


def verify_trace_equivalence(n: int, factory: Callable, L: int = 3, s: int = 1,
                             k: int | None = None) -> VerificationReport:
    """Permutations agreeing on T(pi1) give the same trace and the same
    states on T(pi1), final query state included."""
    if n > MAX_N_TRACE:
        raise InvalidParameter(f"n={n} exceeds the enumeration cap {MAX_N_TRACE}")
    cfg = ModelConfig(n=n, k=k or L, L=L, s=s, m=8, p=4)
    prog = _program(L)
    name = getattr(factory, "name", "controller")
    rep = VerificationReport("trace-equivalence", f"S_{n} agreeing pairs, {name}, L={L}, s={s}")
    for pi1 in all_permutations(n):
        r1 = forward(prog, pi1, factory(pi1), cfg)
        T1 = r1.trace.support
        for pi2 in agreeing_permutations(pi1, T1):
            r2 = forward(prog, pi2, factory(pi2), cfg)
            same = (r2.trace == r1.trace
                    and all(r2.states[j] == r1.states[j] for j in T1))
            rep.record(same, pi1=pi1.map, pi2=pi2.map,
                       trace1=r1.trace.to_json(), trace2=r2.trace.to_json())
    return rep


# -- bandwidth census ------------------------------------------------------

class NarrowProgram:
    """A generic finite-precision program for any (H, m, p).

    Data tokens embed (i, pi(i)) by hashing into Q_p^m; each layer every head
    emits a Q_p^m attention output computed from the cached token states and
    the query, and the query state becomes a fixed function of its old value
    and the H head outputs.  Only the query updates.
    """

    def __init__(self, B: int, x0: tuple, heads: int = 1):
        self.layers = tuple(self._layer(ell) for ell in range(1, B + 1))
        self.x0 = tuple(x0)
        self.heads = heads

    def embed(self, pi: Permutation, cfg: ModelConfig) -> list:
        mod = 1 << (cfg.m * cfg.p)
        reps = [self.x0]
        for i in range(1, cfg.n + 1):
            code = (i * 2654435761 + pi.table[i] * 40503) % mod
            reps.append(_digits(code, cfg.m, cfg.p))
        return reps

    def readout(self, query, cfg: ModelConfig):
        return None

    def _layer(self, ell: int):
        def layer(reps, cache, cfg):
            mod = 1 << (cfg.m * cfg.p)
            x = _value(reps[0], cfg.p)
            heads = []
            for h in range(cfg.H):
                acc = x * (2 * h + 1) + ell
                for j in sorted(cache):
                    if j:
                        acc += (h + 3) * _value(reps[j], cfg.p) * (j + 1)
                heads.append(acc % mod)  # quantized head output in Q_p^m
            new = x * 5 + 1
            for h, a in enumerate(heads):
                new += (h + 1) * a * (1 + (x % 3))
            return {0: _digits(new % mod, cfg.m, cfg.p)}
        return layer


def all_cache_sequences(n: int, s: int, B: int) -> Iterable[tuple]:
    choices = [frozenset(c) for r in range(s + 1)
               for c in itertools.combinations(range(n + 1), r)]
    return itertools.product(choices, repeat=B)


def count_reachable_states(x0: Sequence[int], B: int, cfg: ModelConfig) -> int:
    """|Sigma_B(x0)|: distinct query states after B layers, over every pi in
    S_n and every sequence of cache choices (which covers every controller)."""
    if B < 0:
        raise InvalidParameter("B must be >= 0")
    prog = NarrowProgram(B, tuple(x0), cfg.H)
    run_cfg = cfg.replace(L=B, narrow=True)
    seen = set()
    for pi in all_permutations(cfg.n):
        for seq in all_cache_sequences(cfg.n, cfg.s, B):
            res = forward(prog, pi, FixedController(list(seq) or [frozenset()]), run_cfg)
            seen.add(res.query_state)
    return len(seen)


def verify_bandwidth(n: int = 4, B: int = 2, H: int = 1, m: int = 1, p: int = 1,
                     s: int = 1) -> VerificationReport:
    cfg = ModelConfig(n=n, k=1, L=B, H=H, m=m, p=p, s=s, narrow=True)
    rep = VerificationReport("bandwidth", f"S_{n} x all cache sequences, B={B}, H={H}, m={m}, p={p}")
    bound = 2 ** (B * H * m * p)
    for x0 in itertools.product(range(1 << p), repeat=m):
        count = count_reachable_states(x0, B, cfg)
        rep.record(count <= bound and count <= 2 ** (m * p), x0=x0, count=count, bound=bound)
        rep.stats["max_count"] = max(rep.stats.get("max_count", 0), count)
    rep.stats["bound"] = bound
    return rep


# -- adversarial swap ------------------------------------------------------

def build_adversarial_swap(pi1: Permutation, T1: Iterable[int], u: int, d: int,
                           k: int | None = None) -> Permutation:
    """Value-swap of pi1 sending u to d while agreeing with pi1 on T1.

    ``pi_d(u) = d`` and ``pi_d(pi1^-1(d)) = pi1(u)``.  With ``k`` given the
    target must also avoid the chain z_0..z_k of pi1.
    """
    T = {j for j in T1 if 1 <= j <= pi1.n}
    n = pi1.n
    if not (1 <= u <= n and 1 <= d <= n):
        raise InvalidTarget("u and d must lie in [1, n]")
    if u in T:
        raise InvalidTarget(f"u={u} lies in the trace support")
    if d == pi1(u):
        return pi1
    image_T = {pi1.table[j] for j in T}
    forbidden = T | image_T
    if k is not None:
        forbidden |= set(chain(pi1, k).values)
    if d in forbidden:
        raise InvalidTarget(f"d={d} is not an admissible target")
    src = pi1.inverse()(d)
    img = list(pi1.map)
    img[u - 1] = d
    img[src - 1] = pi1(u)
    out = Permutation(tuple(img))  # raises if not a bijection
    assert all(out.table[j] == pi1.table[j] for j in T)
    return out


def first_exit(pi: Permutation, support: frozenset, k: int) -> int | None:
    """Smallest t in [1, k] with z_{t-1} outside the support, if any."""
    z = chain(pi, k).values
    for t in range(1, k + 1):
        if z[t - 1] not in support:
            return t
    return None


def verify_adversary(n: int = 6, k: int = 2, L: int = 1, s: int = 1,
                     names: Sequence[str] = LOCAL_NAMES) -> VerificationReport:
    """For every pi1 with an exit and every admissible target d: pi_d is a
    bijection agreeing with pi1 on T(pi1), has the same trace and final
    query state, and reaches d at the exit step."""
    if n > MAX_N_ADVERSARY:
        raise InvalidParameter(f"n={n} exceeds the enumeration cap {MAX_N_ADVERSARY}")
    cfg = ModelConfig(n=n, k=k, L=L, s=s, m=8, p=4)
    prog = _program(L)
    rep = VerificationReport("adversary", f"S_{n} x {len(names)} controllers, k={k}, L={L}, s={s}")
    exits = 0
    for name in names:
        make = layer_factory(name, s)
        for pi1 in all_permutations(n):
            r1 = forward(prog, pi1, make(pi1), cfg)
            T1 = r1.trace.support
            t_star = first_exit(pi1, T1, k)
            if t_star is None:
                continue
            exits += 1
            u = chain(pi1, k).values[t_star - 1]
            forbidden = set(T1) | set(chain(pi1, k).values) | {pi1.table[j] for j in T1 if j}
            for d in range(1, n + 1):
                if d in forbidden:
                    continue
                pid = build_adversarial_swap(pi1, T1, u, d, k)
                rd = forward(prog, pid, make(pid), cfg)
                ok = (all(pid.table[j] == pi1.table[j] for j in T1 if j)
                      and rd.trace == r1.trace
                      and rd.query_state == r1.query_state
                      and chain(pid, t_star).values[t_star] == d)
                rep.record(ok, pi1=pi1.map, d=d, u=u, t_star=t_star, controller=name)
    rep.stats["exits"] = exits
    return rep


# -- exact stage-game probabilities ---------------------------------------

@dataclass(frozen=True)
class ExactSuccess:
    joint: Fraction
    good: Fraction  # Pr[E and the chain z_1..z_T is good]
    count: int


def _analytic_random(ctrl: RandomController, z: Sequence[int], n: int, s: int, T: int) -> Fraction:
    if ctrl.shared:
        j = len(set(z[1:T + 1]))
        return Fraction(math.comb(n - j, s - j), math.comb(n, s)) if j <= s else Fraction(0)
    return Fraction(s, n) ** T


def exact_joint_success(factory: Callable, n: int, s: int, T: int) -> ExactSuccess:
    """Exact Pr[E] over pi ~ Unif(S_n) for a stage-game controller.

    ``factory(pi)`` returns a fresh controller.  Uniform random oblivious
    controllers are averaged analytically over their cache draws.
    """
    if n > MAX_N_EXACT:
        raise InvalidParameter(f"n={n} exceeds the enumeration cap {MAX_N_EXACT}")
    game = StageGame(n, s, T)
    joint = Fraction(0)
    good = Fraction(0)
    count = 0
    for pi in all_permutations(n):
        ctrl = factory(pi)
        z = chain(pi, T).values
        is_good = cycle_of_one(pi) > T
        if isinstance(ctrl, RandomController):
            w = _analytic_random(ctrl, z, n, s, T)
        else:
            w = Fraction(int(run_stage_game(pi, ctrl, game).success))
        joint += w
        if is_good:
            good += w
        count += 1
    return ExactSuccess(joint / count, good / count, count)


def stage_factory(name: str, s: int, seed=ZOO_SEED) -> Callable:
    from .controllers import STAGE_LEAD

    def make(pi: Permutation):
        return make_controller(name, pi, s, seed=seed, lead=STAGE_LEAD)
    make.name = name
    return make


# -- empirical estimator for the open step --------------------------------

@dataclass(frozen=True)
class StarEstimate:
    estimate: float
    ci_low: float
    ci_high: float
    conditioned: int
    trials: int
    mean_support: float
    reference: float  # E|T| / (n - 1)
    threshold: float = 1 / 3
    label: str = "evidence only (open problem)"

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def estimate_star(controller: str, n: int, k: int, s: int, window: int, trials: int,
                  seed: int, L: int | None = None, m: int = 8, p: int = 4) -> StarEstimate:
    """Monte Carlo estimate of Pr[z_{tau_j - 1} in T(pi) | chain of 1 longer than k].

    The run uses the serial program and a fresh ``controller`` per trial.
    Reported with a Wilson interval and the E|T|/(n-1) reference; nothing
    here is asserted.
    """
    if trials < 1:
        raise InvalidParameter("need trials >= 1")
    plan = windows(k, s)
    if not 1 <= window <= plan.W:
        raise InvalidParameter(f"window must be in [1, {plan.W}]")
    sigma = plan.boundaries[window - 1] - 1
    if sigma < 1:
        raise InvalidParameter("window boundary must be >= 2")
    L = plan.W if L is None else L
    cfg = ModelConfig(n=n, k=k, L=L, s=s, m=m, p=p)
    prog = build_serial_program(cfg) if L else _program(0)
    rng = SplitMix64(derive_seed(seed, "estimate-star", controller, n, k, s, window, L))
    hits = cond = 0
    support_total = 0
    for _ in range(trials):
        pi = random_permutation(n, rng)
        ctrl = make_controller(controller, pi, s, seed=rng.next_u64())
        res = forward(prog, pi, ctrl, cfg)
        support_total += len(res.trace.support)
        if cycle_of_one(pi) <= k:
            continue
        cond += 1
        hits += chain(pi, sigma).values[sigma] in res.trace.support
    if cond == 0:
        raise InsufficientSamples("no trial satisfied the conditioning event")
    ci = binomtest(hits, cond).proportion_ci(method="wilson")
    mean_t = support_total / trials
    return StarEstimate(hits / cond, float(ci.low), float(ci.high), cond, trials, mean_t, mean_t / (n - 1))


# -- the full suite ----------------------------------------------------------

def leaky_factory(s: int = 1) -> Callable:
    def make(pi: Permutation):
        return LeakyController(pi, s)
    make.name = "leaky"
    return make


def lemma_suite(n_reach: int = 6, n_trace: int = 5, n_adv: int = 6) -> tuple[list, list]:
    """Run every lemma check and its negative controls.

    Returns (reports, control results); a control result is (name, detected).
    """
    reports = []
    for L in (0, 1, 2, 3):
        reports.append(verify_reachability(n_reach, L, 1))
    reports.append(verify_reachability(n_reach, 2, 2))
    for name in LOCAL_NAMES:
        reports.append(verify_trace_equivalence(n_trace, layer_factory(name, 1), L=3, s=1))
    reports.append(verify_trace_equivalence(n_trace, layer_factory("chain-tracking", 2), L=2, s=2))
    for B in (0, 1, 2, 3):
        reports.append(verify_bandwidth(4, B))
    reports.append(verify_bandwidth(4, 2, m=3, p=1))
    reports.append(verify_adversary(n_adv, k=2, L=1, s=1))
    reports.append(verify_adversary(n_adv, k=3, L=2, s=1, names=("chain-tracking", "frontier", "fixed")))

    controls = []
    leak = verify_trace_equivalence(n_trace, leaky_factory(), L=3, s=1)
    controls.append(("leaky controller breaks trace equivalence", leak.violations > 0))
    pi = Permutation.shift(6)
    try:
        build_adversarial_swap(pi, {0, 1, 2}, 3, 2)
        caught = False
    except InvalidTarget:
        caught = True
    controls.append(("swap target inside the support is rejected", caught))
    return reports, controls
