"""Seeded sweeps that produce plot-ready records.

Every record draws from its own generator seeded by
``derive_seed(master, experiment, params)``, so a sweep gives the same
numbers in any order and a rerun with the same seed is byte-identical.
"""
from __future__ import annotations

import csv
import io
import json
import time
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Iterable, Sequence

from .constructions import build_serial_program, simulate_windowed_pd
from .bounds import oblivious_prob_bound
from .controllers import OracleController, RandomController, StageGame, run_stage_game
from .errors import InvalidParameter
from .qengine import ModelConfig, ceil_log2, forward
from .rng import SplitMix64, derive_seed
from .task import chain, cycle_of_one, random_permutation

COLUMNS = ("experiment", "n", "k", "s", "L", "T", "H", "m", "p",
           "trials", "successes", "accuracy", "seed")


@dataclass
class ExperimentRecord:
    experiment: str
    n: int
    k: int
    s: int
    L: int
    T: int
    H: int
    m: int
    p: int
    trials: int
    successes: int
    seed: int
    wall_time: float = 0.0
    reference: float | None = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 0 <= self.successes <= self.trials:
            raise InvalidParameter("need 0 <= successes <= trials")

    @property
    def accuracy(self) -> float:
        return self.successes / self.trials if self.trials else 0.0

    def key(self) -> tuple:
        return (self.experiment, self.n, self.k, self.s, self.L, self.T, self.H, self.m, self.p)

    def row(self) -> dict:
        d = {c: getattr(self, c) for c in COLUMNS}
        if self.reference is not None:
            d["reference"] = self.reference
        d.update(sorted(self.extra.items()))
        return d

    @classmethod
    def from_row(cls, d: dict) -> "ExperimentRecord":
        names = {f.name for f in fields(cls)}
        kw = {k: v for k, v in d.items() if k in names}
        extra = {k: v for k, v in d.items() if k not in names and k not in COLUMNS}
        return cls(**kw, extra=extra)


def _timed(fn):
    t0 = time.perf_counter()
    rec = fn()
    rec.wall_time = time.perf_counter() - t0
    return rec


def serial_record(n: int, k: int, L: int, trials: int, seed: int,
                  m: int = 8, p: int = 4) -> ExperimentRecord:
    """Hardcoded serial program with an oracle cache on PC_{n,k} at depth L."""
    def run():
        cfg = ModelConfig(n=n, k=k, L=L, s=1, m=m, p=p)
        prog = build_serial_program(cfg)
        rng = SplitMix64(derive_seed(seed, "serial", n, k, L))
        ok = 0
        for _ in range(trials):
            pi = random_permutation(n, rng)
            res = forward(prog, pi, OracleController(pi, 1), cfg)
            ok += res.answer == chain(pi, k).answer
        return ExperimentRecord("serial", n, k, 1, L, 0, 1, m, p, trials, ok, seed)
    return _timed(run)


def run_serial_sweep(n: int = 16, ks: Sequence[int] = (1, 2, 4, 8, 12),
                     Ls: Iterable[int] = range(1, 17), trials: int = 5000,
                     seed: int = 0) -> list[ExperimentRecord]:
    Ls = list(Ls)
    recs = [serial_record(n, k, L, trials, seed) for k in ks for L in Ls]
    return sorted(recs, key=ExperimentRecord.key)


def windowed_record(n: int, k: int, s: int, L: int, trials: int, seed: int) -> ExperimentRecord:
    def run():
        rng = SplitMix64(derive_seed(seed, "windowed", n, k, s, L))
        ok = 0
        for _ in range(trials):
            pi = random_permutation(n, rng)
            res = simulate_windowed_pd(pi, k, s, L)
            ok += res.answer == chain(pi, k).answer
        return ExperimentRecord("windowed", n, k, s, L, 0, 1, 0, 0, trials, ok, seed)
    return _timed(run)


def run_windowed_sweep(n: int = 16, k: int = 8, ss: Sequence[int] = (1, 2, 4, 8, 16),
                       Ls: Iterable[int] = range(1, 17), trials: int = 5000,
                       seed: int = 0) -> list[ExperimentRecord]:
    """Windowed pointer doubling over an (s, L) grid, plus one ``windowed-min-L``
    record per s holding the smallest L with 100% accuracy (L = 0 if none)."""
    Ls = sorted(Ls)
    recs = []
    for s in ss:
        row = [windowed_record(n, k, s, L, trials, seed) for L in Ls]
        recs.extend(row)
        full = [r.L for r in row if r.successes == r.trials]
        recs.append(ExperimentRecord("windowed-min-L", n, k, s, min(full) if full else 0,
                                     0, 1, 0, 0, trials, trials if full else 0, seed))
    return sorted(recs, key=ExperimentRecord.key)


def min_L_by_s(records: Iterable[ExperimentRecord]) -> dict:
    return {r.s: r.L for r in records if r.experiment == "windowed-min-L"}


def stages_for_k(k: int) -> int:
    return max(1, ceil_log2(k))


def random_cache_record(n: int, s: int, k: int, trials: int, seed: int) -> ExperimentRecord:
    """Stage game with a fresh uniform s-subset per stage, independent of pi.

    ``successes`` counts joint success over all T stages; ``extra`` carries
    the good-chain counts.
    """
    def run():
        T = stages_for_k(k)
        game = StageGame(n, s, T)
        rng = SplitMix64(derive_seed(seed, "random-cache", n, s, k))
        ok = good = good_ok = 0
        for _ in range(trials):
            pi = random_permutation(n, rng)
            win = run_stage_game(pi, RandomController(n, s, rng.next_u64()), game).success
            is_good = cycle_of_one(pi) > T
            ok += win
            good += is_good
            good_ok += win and is_good
        ref = float(oblivious_prob_bound(n, s, T).main)
        extra = {
            "good_trials": good,
            "good_successes": good_ok,
            "good_accuracy": round(good_ok / good, 6) if good else 0.0,
        }
        return ExperimentRecord("random-cache", n, k, s, 0, T, 1, 0, 0, trials, ok, seed,
                                reference=round(ref, 6), extra=extra)
    return _timed(run)


def run_random_cache_sweep(n: int = 16, s: int = 8, ks: Sequence[int] = (1, 2, 4, 8, 16),
                           trials: int = 5000, seed: int = 0) -> list[ExperimentRecord]:
    return sorted((random_cache_record(n, s, k, trials, seed) for k in ks),
                  key=ExperimentRecord.key)


def _rows(records: Sequence[ExperimentRecord]) -> list[dict]:
    rows = [r.row() for r in records]
    for d in rows:
        d["accuracy"] = round(d["accuracy"], 6)
    return rows


def format_records(records: Sequence[ExperimentRecord], fmt: str = "csv") -> str:
    """Records as CSV or JSON text, deterministic column order."""
    if not records:
        raise InvalidParameter("no records to emit")
    rows = _rows(records)
    if fmt == "json":
        return json.dumps(rows, indent=1) + "\n"
    if fmt != "csv":
        raise InvalidParameter(f"unknown format {fmt!r}")
    cols = list(COLUMNS)
    for d in rows:
        cols.extend(c for c in d if c not in cols)
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n", restval="")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def emit_records(records: Sequence[ExperimentRecord], fmt: str = "csv",
                 path: str | Path | None = None) -> str:
    """Write records to ``path`` (if given) and return the text.

    Wall time is left out so reruns are byte-identical.
    """
    text = format_records(records, fmt)
    if path is not None:
        Path(path).write_text(text)
    return text


def load_records(text: str, fmt: str = "json") -> list[ExperimentRecord]:
    if fmt == "json":
        return [ExperimentRecord.from_row(d) for d in json.loads(text)]
    rows = list(csv.DictReader(io.StringIO(text)))
    out = []
    for d in rows:
        clean = {}
        for key, v in d.items():
            if v == "":
                continue
            if key == "experiment":
                clean[key] = v
            else:
                num = float(v)
                clean[key] = int(num) if num.is_integer() and "." not in v else num
        clean.pop("accuracy", None)
        out.append(ExperimentRecord.from_row(clean))
    return out
