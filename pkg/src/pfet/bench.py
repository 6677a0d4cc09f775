"""Per-iteration cost of plaintext vs encrypted rounds across market sizes."""
from __future__ import annotations

import os
import time
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .he import CountingProvider, SchemeParams, ShadowProvider
from .market import MarketState, run_iteration
from .protocol import ProtocolSession
from .scenario import generate_scenario

DEFAULT_SIZES = [(10, 10), (20, 20), (30, 30), (40, 40), (50, 50)]
DEFAULT_SEED = 2021


def bench_seed(default=DEFAULT_SEED):
    raw = os.environ.get("PFET_SEED")
    return int(raw) if raw not in (None, "") else default


@dataclass
class SizeResult:
    n_sellers: int
    n_buyers: int
    plain_mean: float
    plain_std: float
    enc_mean: float
    enc_std: float
    ct_mults: int
    expected_ct_mults: int

    @property
    def n(self):
        return (self.n_sellers + self.n_buyers) / 20


@dataclass
class BenchReport:
    rows: list[SizeResult]
    coeffs: Optional[tuple[float, float, float]]
    r2: Optional[float]
    seed: int


def parse_sizes(text):
    """``"10x10,20x20"`` -> ``[(10, 10), (20, 20)]``."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        a, sep, b = part.lower().partition("x")
        if not sep:
            raise ValueError(f"size {part!r} is not of the form <sellers>x<buyers>")
        out.append((int(a), int(b)))
    if not out:
        raise ValueError("no sizes given")
    return out


def _time_plain(scenario, reps):
    state = MarketState.initial(scenario)
    state, _ = run_iteration(state, scenario)  # warm-up, also triggers JIT
    times = []
    for _ in range(reps):
        t0 = time.perf_counter()
        state, _ = run_iteration(state, scenario)
        times.append(time.perf_counter() - t0)
    return times


def _time_encrypted(scenario, reps, scheme):
    provider = CountingProvider(ShadowProvider(scheme))
    session = ProtocolSession(scenario, provider)
    session.step()
    times, mults = [], set()
    for _ in range(reps):
        if session.done:
            session = ProtocolSession(scenario, provider)
        provider.reset()
        t0 = time.perf_counter()
        session.step()
        times.append(time.perf_counter() - t0)
        mults.add(provider.counts["mul"])
    if len(mults) != 1:
        raise RuntimeError(f"ciphertext multiplication count varied between rounds: {mults}")
    return times, mults.pop()


def quadratic_fit(n, t):
    """Least-squares ``a n^2 + b n + c``; ``(None, None)`` with fewer than 3 sizes."""
    n = np.asarray(n, float)
    t = np.asarray(t, float)
    if np.unique(n).size < 3:
        return None, None
    coeffs = np.polyfit(n, t, 2)
    resid = t - np.polyval(coeffs, n)
    ss_tot = float(np.sum((t - t.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return tuple(float(c) for c in coeffs), r2


def run_bench(sizes=DEFAULT_SIZES, reps=5, seed=None, scheme=None, log=None) -> BenchReport:
    if not sizes:
        raise ValueError("sizes must be nonempty")
    seed = bench_seed() if seed is None else seed
    scheme = scheme or SchemeParams()
    reps = max(int(reps), 1)
    rows = []
    for ns, nb in sizes:
        scenario = generate_scenario(ns, nb, seed=seed)
        plain = _time_plain(scenario, reps)
        enc, mults = _time_encrypted(scenario, reps, scheme)
        row = SizeResult(ns, nb, float(np.mean(plain)), float(np.std(plain)),
                         float(np.mean(enc)), float(np.std(enc)), mults, ns * nb + 3 * ns)
        rows.append(row)
        if log:
            log(f"{ns}x{nb}: plaintext {row.plain_mean:.2e}s  encrypted {row.enc_mean:.3f}s "
                f"(+-{row.enc_std:.3f})  ct-mults {mults}")
    coeffs, r2 = quadratic_fit([r.n for r in rows], [r.enc_mean for r in rows])
    return BenchReport(rows, coeffs, r2, seed)
