"""Upper-bound constructions: the serial lookup program and windowed
pointer doubling."""
from __future__ import annotations

import json
from dataclasses import dataclass

from .errors import InvalidParameter
from .qengine import (
    ModelConfig,
    _digits,
    _encode,
    decode_pointer,
    encode_token,
    hard_match_attend,
    hop_budget,
)
from .task import Permutation, windows, WindowPlan


class LookupLayer:
    """One content lookup by the query: z_t -> z_{t+1}.

    The query's hop budget gates the update, so layers past the k-th leave
    the answer in place.  Data tokens never take part in attention.
    """

    def __call__(self, reps, cache, cfg: ModelConfig):
        q = reps[0]
        hops = hop_budget(q, cfg)
        if hops == 0:
            return None
        out = hard_match_attend(q, cache, reps, cfg)
        c = cfg.digits
        if not any(out[1:1 + c]):
            return None  # miss: residual carries the query forward
        new = (1,) + out[1:1 + c] + _digits(hops - 1, c, cfg.p)
        return {0: new + (0,) * (cfg.m - len(new))}

    def __repr__(self):
        return "LookupLayer()"


@dataclass(frozen=True)
class LayerProgram:
    layers: tuple
    name: str = "program"

    @property
    def depth(self) -> int:
        return len(self.layers)

    def embed(self, pi: Permutation, cfg: ModelConfig) -> list:
        reps = [encode_token(0, 1, cfg, hops=cfg.k)]
        enc = _encode
        n, m, p, c = cfg.n, cfg.m, cfg.p, cfg.digits
        table = pi.table
        reps.extend(enc(i, table[i], 0, n, m, p, c) for i in range(1, n + 1))
        return reps

    def readout(self, query, cfg: ModelConfig) -> int:
        return decode_pointer(query, "self", cfg)


def build_serial_program(cfg: ModelConfig) -> LayerProgram:
    if cfg.L < 1:
        raise InvalidParameter("serial program needs L >= 1")
    layer = LookupLayer()
    return LayerProgram(tuple(layer for _ in range(cfg.L)), name="serial")


@dataclass(frozen=True)
class PDSchedule:
    plan: WindowPlan
    stages_per_window: int
    depth: int

    def to_json(self) -> str:
        return json.dumps({
            "windows": self.plan.W,
            "stages_per_window": self.stages_per_window,
            "depth": self.depth,
        })


def stages_for(length: int) -> int:
    """Doubling stages to resolve a window of ``length`` hops."""
    return max(1, (length - 1).bit_length())


def pd_schedule(n: int, k: int, s: int) -> PDSchedule:
    if k < 1 or s < 1:
        raise InvalidParameter("pd_schedule needs k >= 1 and s >= 1")
    plan = windows(k, s)
    per = stages_for(min(s, k))
    return PDSchedule(plan, per, plan.W * per)


@dataclass(frozen=True)
class PDResult:
    success: bool
    answer: int
    depth_used: int
    depth_needed: int


def _resolve_window(table, start: int, length: int, stages: int) -> int:
    """Oracle window: cache the window's chain positions, double jumps.

    ``jump[e][x]`` holds pi^(2**e)(x) for cached x; stage 1 reads pi and
    builds the length-2 table, each further stage doubles once more.  The
    window output is assembled from the binary expansion of ``length``.
    """
    cached = []
    x = start
    for _ in range(length):
        cached.append(x)
        x = table[x]
    jump = [{x: table[x] for x in cached}]
    for e in range(1, stages + 1):
        prev = jump[-1]
        jump.append({x: prev[prev[x]] for x in cached
                     if x in prev and prev[x] in prev})
    pos, e = start, 0
    rest = length
    while rest:
        if rest & 1:
            pos = jump[e][pos]
        rest >>= 1
        e += 1
    return pos


def simulate_windowed_pd(pi: Permutation, k: int, s: int, L_budget: int) -> PDResult:
    """Combinatorial-fidelity windowed pointer doubling with an oracle cache.

    Windows run in order while the layer budget lasts; a window that cannot
    be finished leaves the pointer at the last completed boundary.
    """
    if L_budget < 0:
        raise InvalidParameter("layer budget must be >= 0")
    sched = pd_schedule(pi.n, k, s)
    table = pi.table
    pos, used, prev = 1, 0, 0
    for tau in sched.plan.boundaries:
        if used + sched.stages_per_window > L_budget:
            break
        pos = _resolve_window(table, pos, tau - prev, sched.stages_per_window)
        used += sched.stages_per_window
        prev = tau
    return PDResult(sched.depth <= L_budget, pos, used, sched.depth)
