"""Finite-precision cache-restricted transformer engine.

Token states are tuples of ``m`` integers in ``[0, 2**p - 1]``.  At every
layer a controller picks the shared cache ``S`` (at most ``s`` positions);
attention only sees keys in ``S`` and every position that does not take part
in attention keeps its previous state (evicted tokens become ghost states).

Pointer layout used by the hardcoded programs::

    coord 0          role flag (1 = query, 0 = data token)
    coords 1..c      self field: the token's own index (query: current pointer)
    coords c+1..2c   payload field: pi(i) (query: remaining hop budget)

with ``c = ceil(ceil(log2(n + 1)) / p)`` little-endian base-2**p digits.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

from .errors import (
    CacheOverflow,
    CorruptState,
    InvalidParameter,
    InvalidValue,
    LocalityViolation,
)

QVec = tuple  # tuple[int, ...] with every entry in [0, 2**p - 1]
LayerState = list  # n + 1 QVecs, index 0 is the query token


def ceil_log2(x: int) -> int:
    """Exact ceil(log2 x) for integers x >= 1."""
    if x < 1:
        raise InvalidParameter("log2 of a non-positive integer")
    return (x - 1).bit_length()


@dataclass(frozen=True)
class ModelConfig:
    n: int
    k: int
    L: int
    H: int = 1
    m: int = 8
    p: int = 4
    s: int = 1
    # narrow configs (m*p too small for a pointer) skip the layout check;
    # only the bandwidth census runs them
    narrow: bool = False
    digits: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        for name in ("n", "k", "H", "m", "p", "s"):
            if getattr(self, name) < 1:
                raise InvalidParameter(f"{name} must be >= 1")
        if self.L < 0:
            raise InvalidParameter("L must be >= 0")
        if self.s > self.n + 1:
            raise InvalidParameter("cache larger than the token count")
        bits = ceil_log2(self.n + 1)
        c = -(-bits // self.p)
        object.__setattr__(self, "digits", c)
        if not self.narrow:
            if self.m * self.p < 2 * bits + self.p:
                raise InvalidParameter("m*p too small for two pointer fields and a flag")
            if self.m < 1 + 2 * c:
                raise InvalidParameter(f"m={self.m} cannot hold the 1+2*{c} coordinate layout")

    @property
    def qmax(self) -> int:
        return (1 << self.p) - 1

    def replace(self, **changes) -> "ModelConfig":
        kw = dict(n=self.n, k=self.k, L=self.L, H=self.H, m=self.m, p=self.p,
                  s=self.s, narrow=self.narrow)
        kw.update(changes)
        return ModelConfig(**kw)


@dataclass(frozen=True)
class CacheTrace:
    per_layer: tuple[frozenset, ...]
    support: frozenset

    def to_json(self) -> str:
        return json.dumps({
            "layers": [sorted(S) for S in self.per_layer],
            "support": sorted(self.support),
        })

    @classmethod
    def from_json(cls, text: str) -> "CacheTrace":
        d = json.loads(text)
        return cls(tuple(frozenset(S) for S in d["layers"]), frozenset(d["support"]))


@dataclass(frozen=True)
class ForwardResult:
    answer: int | None
    trace: CacheTrace
    states: tuple  # final LayerState

    @property
    def query_state(self) -> QVec:
        return self.states[0]


def quantize(real_vector: Iterable[float], p: int) -> QVec:
    """Round half up, then clamp to [0, 2**p - 1]."""
    if p < 1:
        raise InvalidParameter("p must be >= 1")
    vals = tuple(real_vector)
    try:
        return _quantize_cached(vals, p)
    except TypeError:  # unhashable input
        return _quantize(vals, p)


def _quantize(vals: tuple, p: int) -> QVec:
    top = (1 << p) - 1
    out = []
    for x in vals:
        if isinstance(x, int):
            q = x
        else:
            x = float(x)
            if math.isnan(x):
                raise InvalidValue("NaN cannot be quantized")
            q = math.floor(x + 0.5) if math.isfinite(x) else (top if x > 0 else 0)
        out.append(0 if q < 0 else top if q > top else int(q))
    return tuple(out)


# quantization depends only on the values, so equal keys (e.g. 3 and 3.0)
# may share an entry
_quantize_cached = lru_cache(maxsize=1 << 16)(_quantize)


@lru_cache(maxsize=None)
def _digits(value: int, c: int, p: int) -> tuple:
    base = 1 << p
    out = []
    for _ in range(c):
        out.append(value % base)
        value //= base
    if value:
        raise InvalidParameter("value does not fit the digit field")
    return tuple(out)


def _value(digits: Sequence[int], p: int) -> int:
    v = 0
    for d in reversed(digits):
        v = (v << p) | d
    return v


@lru_cache(maxsize=None)
def _encode(i: int, payload: int, hops: int, n: int, m: int, p: int, c: int) -> QVec:
    flag = 1 if i == 0 else 0
    head = payload if i == 0 else i
    tail = hops if i == 0 else payload
    v = (flag,) + _digits(head, c, p) + _digits(tail, c, p)
    return v + (0,) * (m - len(v))


def encode_token(self_index: int, payload: int, cfg: ModelConfig, hops: int = 0) -> QVec:
    """Encode a data token (i, pi(i)) or, for ``self_index == 0``, the query.

    The query keeps its current pointer (``payload``) in the self field and
    its remaining hop budget ``hops`` in the payload field.
    """
    if cfg.narrow:
        raise InvalidParameter("narrow configs have no pointer layout")
    if not (0 <= self_index <= cfg.n and 0 <= payload <= cfg.n):
        raise InvalidParameter("index outside [0, n]")
    if self_index and hops:
        raise InvalidParameter("only the query carries a hop budget")
    if hops < 0 or hops >= 1 << (cfg.p * cfg.digits):
        raise InvalidParameter("hop budget does not fit the payload field")
    return _encode(self_index, payload, hops, cfg.n, cfg.m, cfg.p, cfg.digits)


def _field_slice(field_name: str, c: int) -> slice:
    if field_name == "self":
        return slice(1, 1 + c)
    if field_name == "payload":
        return slice(1 + c, 1 + 2 * c)
    raise InvalidParameter(f"unknown field {field_name!r}")


def decode_pointer(v: QVec, field_name: str, cfg: ModelConfig) -> int:
    value = _value(v[_field_slice(field_name, cfg.digits)], cfg.p)
    if value > cfg.n:
        raise CorruptState(f"decoded {value} exceeds n={cfg.n}")
    return value


def hop_budget(q: QVec, cfg: ModelConfig) -> int:
    return _value(q[_field_slice("payload", cfg.digits)], cfg.p)


def hard_match_attend(query: QVec, cache_positions: Iterable[int], state: Sequence[QVec],
                      cfg: ModelConfig) -> QVec:
    """Saturated-softmax lookup of the query's pointer among cached keys.

    Keys are the self fields of cached data tokens; the query token has a zero
    key.  The value projection moves the matched token's payload into the
    pointer field.  A miss returns the zero vector.
    """
    c = cfg.digits
    want = query[1:1 + c]
    hit = None
    for j in cache_positions:
        if not 0 <= j <= cfg.n:
            raise InvalidParameter(f"cache position {j} outside [0, n]")
        v = state[j]
        if v[0] == 0 and v[1:1 + c] == want:
            if hit is not None:
                raise CorruptState("two cached keys share a self index")
            hit = v
    out = [0] * cfg.m
    if hit is not None:
        out[1:1 + c] = hit[1 + c:1 + 2 * c]
    return tuple(out)


class LayerView:
    """What a controller may read when choosing the cache for one layer.

    Only representations at positions in ``support`` (the query plus every
    position cached at an earlier layer) are reachable.
    """

    __slots__ = ("layer", "support", "_reps", "_cfg")

    def __init__(self, layer: int, support: frozenset, reps: Sequence[QVec], cfg: ModelConfig):
        self.layer = layer
        self.support = support
        self._reps = reps
        self._cfg = cfg

    def state(self, j: int) -> QVec:
        if j not in self.support:
            raise LocalityViolation(f"read of position {j} outside support {sorted(self.support)}")
        return self._reps[j]

    @property
    def query(self) -> QVec:
        return self._reps[0]

    def pointer(self) -> int:
        """The query's current pointer."""
        return decode_pointer(self._reps[0], "self", self._cfg)

    def pi(self, j: int) -> int:
        """pi(j) as carried by the (possibly ghost) state of token j."""
        if j == 0:
            raise LocalityViolation("position 0 is the query, not a data token")
        return decode_pointer(self.state(j), "payload", self._cfg)


def forward(program, pi, controller, cfg: ModelConfig) -> ForwardResult:
    """Run ``program`` on instance ``pi`` with cache choices from ``controller``.

    ``program`` supplies ``layers`` (callables ``layer(reps, S, cfg)`` that
    return ``{position: new_state}`` for participating positions), ``embed``
    and ``readout``.  The controller sees a ``LayerView`` restricted to the
    current support.
    """
    layers = program.layers
    if len(layers) != cfg.L:
        raise InvalidParameter(f"program has {len(layers)} layers, config says L={cfg.L}")
    if pi.n != cfg.n:
        raise InvalidParameter("permutation size does not match config")
    reps = program.embed(pi, cfg)
    n, s, p = cfg.n, cfg.s, cfg.p
    support = frozenset((0,))
    per_layer = []
    for ell, layer in enumerate(layers, start=1):
        chosen = frozenset(controller.select(ell, LayerView(ell, support, reps, cfg)))
        if len(chosen) > s:
            raise CacheOverflow(f"layer {ell}: {len(chosen)} positions for a cache of {s}")
        for j in chosen:
            if not 0 <= j <= n:
                raise InvalidParameter(f"layer {ell}: position {j} outside [0, {n}]")
        updates = layer(reps, chosen, cfg)
        if updates:
            reps = list(reps)
            for j, v in updates.items():
                reps[j] = quantize(v, p)
        per_layer.append(chosen)
        support = support | chosen
    trace = CacheTrace(tuple(per_layer), support)
    return ForwardResult(program.readout(reps[0], cfg), trace, tuple(reps))
