"""Cache controllers and the stage game they are scored in.

A controller exposes ``select(step, view)`` returning the positions to cache
at that step.  The same controllers run in two places:

* the layer engine (``qengine.forward``), where ``view`` is a ``LayerView``
  over representations in the current support, and
* the stage game (``run_stage_game``), where ``view`` exposes pi only at
  positions cached at earlier stages.

Either way a read outside the support raises ``LocalityViolation``.  The
``lead`` of a chain-following controller says which chain element it must
hold at step t: ``z_{t-1}`` (the lookup source, layer engine) or ``z_t``
(the stage destination, stage game).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import CacheOverflow, InvalidParameter, LocalityViolation
from .rng import SplitMix64, as_rng
from .task import Permutation, chain

LAYER_LEAD = 0
STAGE_LEAD = 1

KINDS = ("oblivious_fixed", "oblivious_random", "adaptive_chain_tracking", "oracle")


def fill(chosen: Iterable[int], n: int, s: int) -> frozenset:
    """Top ``chosen`` up to ``s`` positions with the lowest free indices in [1, n]."""
    out = []
    seen = set()
    for j in chosen:
        if j not in seen and len(out) < s:
            out.append(j)
            seen.add(j)
    i = 1
    while len(out) < s and i <= n:
        if i not in seen:
            out.append(i)
            seen.add(i)
        i += 1
    return frozenset(out)


class Controller:
    name = "controller"
    kind = "oblivious_fixed"
    local = True
    oblivious = True

    def select(self, step: int, view) -> Iterable[int]:
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}({self.name})"


class FixedController(Controller):
    """Oblivious: a fixed cache per step (the last set repeats)."""

    kind = "oblivious_fixed"

    def __init__(self, caches: Sequence[Iterable[int]], name: str | None = None):
        if not caches:
            raise InvalidParameter("need at least one cache set")
        self.caches = [frozenset(c) for c in caches]
        self.name = name or "fixed" + "".join(str(sorted(c)) for c in self.caches)

    def select(self, step, view):
        return self.caches[min(step, len(self.caches)) - 1]


class RandomController(Controller):
    """Oblivious: uniform s-subsets of [1, n] drawn from the controller's own
    generator, independent of pi.

    ``shared=True`` draws one subset and reuses it at every step (common
    randomness); otherwise every step draws afresh.
    """

    kind = "oblivious_random"

    def __init__(self, n: int, s: int, seed, shared: bool = False):
        if not 0 <= s <= n:
            raise InvalidParameter("need 0 <= s <= n")
        self.n, self.s, self.shared = n, s, shared
        self.rng: SplitMix64 = as_rng(seed)
        self._fixed = None
        self.name = "random-shared" if shared else "random"

    def select(self, step, view):
        if self.shared:
            if self._fixed is None:
                self._fixed = frozenset(self.rng.sample(range(1, self.n + 1), self.s))
            return self._fixed
        return self.rng.sample(range(1, self.n + 1), self.s)


class ChainTrackingController(Controller):
    """Adaptive chain tracking.

    Walks the chain from 1 reading pi only at supported positions.  At step t
    it caches the target ``z_{t-1+lead}`` when the walk reaches it; otherwise
    it gambles on the furthest chain element it knows.  Remaining slots take
    the lowest free indices.  In the stage game this is: C_1 = {1} plus
    fillers, then z_t in every C_t after a hit.
    """

    kind = "adaptive_chain_tracking"
    oblivious = False

    def __init__(self, n: int, s: int, lead: int = STAGE_LEAD):
        if s < 1:
            raise InvalidParameter("s must be >= 1")
        self.n, self.s, self.lead = n, s, lead
        self.name = "chain-tracking"

    def select(self, step, view):
        target = step - 1 + self.lead
        z = 1
        for _ in range(target):
            if z not in view.support:
                break
            z = view.pi(z)
        return fill([z], self.n, self.s)


class FrontierController(Controller):
    """Adaptive: caches images pi(j) of supported tokens that are not yet
    supported, smallest first; starts from {1}.  Exercises pi reads on the
    whole support rather than along one chain."""

    kind = "adaptive_chain_tracking"
    oblivious = False

    def __init__(self, n: int, s: int):
        self.n, self.s = n, s
        self.name = "frontier"

    def select(self, step, view):
        known = sorted(j for j in view.support if j != 0)
        if not known:
            return fill([1], self.n, self.s)
        new = sorted({view.pi(j) for j in known} - set(view.support))
        return fill(new[:self.s], self.n, self.s)


class QueryOnlyController(Controller):
    """Adaptive but reads nothing except the query state.

    Works with any layout (including narrow configs), so it also drives the
    bandwidth census.  Stage-game views carry no query; it then behaves as
    a step-indexed oblivious rule.
    """

    kind = "adaptive_chain_tracking"
    oblivious = False

    def __init__(self, n: int, s: int):
        self.n, self.s = n, s
        self.name = "query-only"

    def select(self, step, view):
        q = getattr(view, "query", None) or ()
        h = step
        for d in q:
            h = h * 31 + d
        return fill([1 + h % self.n], self.n, self.s)


class OracleController(Controller):
    """Knows pi outright and caches the needed chain element.  Not local:
    excluded from lower-bound and locality suites."""

    kind = "oracle"
    local = False
    oblivious = False

    def __init__(self, pi: Permutation, s: int, lead: int = LAYER_LEAD):
        self.n, self.s, self.lead = pi.n, s, lead
        self._table = pi.table
        self.z = [1]
        self.name = "oracle"

    def select(self, step, view):
        t = step - 1 + self.lead
        while len(self.z) <= t:
            self.z.append(self._table[self.z[-1]])
        return fill([self.z[t]], self.n, self.s)


class LeakyController(Controller):
    """Negative control: peeks at pi outside the support by holding pi."""

    kind = "adaptive_chain_tracking"
    local = False
    oblivious = False

    def __init__(self, pi: Permutation, s: int):
        self.pi, self.n, self.s = pi, pi.n, s
        self.name = "leaky"

    def select(self, step, view):
        return fill([self.pi(self.n)], self.n, self.s)


class PeekingController(Controller):
    """Negative control: tries to read pi(n) through the view."""

    oblivious = False
    local = False

    def __init__(self, n: int, s: int):
        self.n, self.s = n, s
        self.name = "peeking"

    def select(self, step, view):
        return fill([view.pi(self.n)], self.n, self.s)


def oblivious_random_controller(n: int, s: int, T: int, seed) -> RandomController:
    return RandomController(n, s, seed)


def adaptive_chain_tracking_controller(n: int, s: int, lead: int = STAGE_LEAD) -> ChainTrackingController:
    return ChainTrackingController(n, s, lead)


def oracle_controller(pi: Permutation, s: int = 1, lead: int = LAYER_LEAD) -> OracleController:
    return OracleController(pi, s, lead)


@dataclass(frozen=True)
class StageGame:
    n: int
    s: int
    T: int

    def __post_init__(self):
        if self.T < 1:
            raise InvalidParameter("need T >= 1")
        if self.n < self.T + 1:
            raise InvalidParameter("stage game needs n >= T + 1")
        if not 1 <= self.s <= self.n:
            raise InvalidParameter("need 1 <= s <= n")


class StageView:
    """pi restricted to positions cached at earlier stages."""

    __slots__ = ("step", "support", "_table", "reads")
    query = None

    def __init__(self, step: int, support: frozenset, table):
        self.step = step
        self.support = support
        self._table = table
        self.reads = set()

    def pi(self, j: int) -> int:
        if j not in self.support:
            raise LocalityViolation(f"stage {self.step}: read of pi({j}) outside {sorted(self.support)}")
        self.reads.add(j)
        return self._table[j]


@dataclass(frozen=True)
class StageRun:
    hits: tuple
    caches: tuple

    @property
    def success(self) -> bool:
        return all(self.hits)


def run_stage_game(pi: Permutation, ctrl: Controller, game: StageGame) -> StageRun:
    """Score a controller: stage t hits iff pi^t(1) is in C_t."""
    if pi.n != game.n:
        raise InvalidParameter("permutation size does not match the game")
    table = pi.table
    z = chain(pi, game.T).values
    support = frozenset()
    hits, caches = [], []
    for t in range(1, game.T + 1):
        C = frozenset(ctrl.select(t, StageView(t, support, table)))
        if len(C) > game.s:
            raise CacheOverflow(f"stage {t}: {len(C)} positions for a cache of {game.s}")
        if any(not 1 <= j <= game.n for j in C):
            raise InvalidParameter(f"stage {t}: cache {sorted(C)} outside [1, n]")
        hits.append(z[t] in C)
        caches.append(C)
        support = support | C
    return StageRun(tuple(hits), tuple(caches))


def rotating_caches(n: int, s: int, steps: int) -> list[frozenset]:
    """Step t caches the s consecutive positions starting at (t-1)*s + 1 (mod n)."""
    return [frozenset(((t * s + i) % n) + 1 for i in range(s)) for t in range(steps)]


LOCAL_NAMES = ("fixed", "fixed-skip1", "rotating", "random", "random-shared",
               "chain-tracking", "frontier", "query-only")
OBLIVIOUS_NAMES = ("fixed", "fixed-skip1", "rotating", "random", "random-shared")


def make_controller(name: str, pi: Permutation, s: int, *, steps: int = 64,
                    seed=0, lead: int = LAYER_LEAD) -> Controller:
    """Build a controller by CLI-style name for one run on ``pi``.

    Only ``oracle`` and ``leaky`` look at ``pi``; the rest ignore it.  For
    ``random`` variants ``seed`` fixes the draws, so a constant seed gives a
    deterministic oblivious algorithm.
    """
    n = pi.n
    if name == "fixed":
        return FixedController([fill([], n, s)], name="fixed")
    if name == "fixed-skip1":
        return FixedController([frozenset(range(2, min(n, s + 1) + 1))], name="fixed-skip1")
    if name == "rotating":
        return FixedController(rotating_caches(n, s, steps), name="rotating")
    if name == "random":
        return RandomController(n, s, seed)
    if name == "random-shared":
        return RandomController(n, s, seed, shared=True)
    if name == "chain-tracking":
        return ChainTrackingController(n, s, lead)
    if name == "frontier":
        return FrontierController(n, s)
    if name == "query-only":
        return QueryOnlyController(n, s)
    if name == "oracle":
        return OracleController(pi, s, lead)
    if name == "leaky":
        return LeakyController(pi, s)
    raise InvalidParameter(f"unknown controller {name!r}")
