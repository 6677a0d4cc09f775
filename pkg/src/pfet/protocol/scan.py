"""Search serialised transcripts for plaintext images of private values.

Sensitive scalars: every price of every round, each lambda/theta, every
purchase X_ji and per-buyer welfare term, per-seller welfare and the average
welfare. Each 8-byte window of each message is read four ways (big/little
endian, as an IEEE-754 double and as a 64-bit fixed-point word at the
ciphertext scale and at the plain-scalar scale) and compared against the
sorted sensitive values. Ciphertext-scale matches allow a few words of
rounding plus a relative slack for values that went through several
homomorphic operations; plain-scale matches allow only the rounding words
(a relative slack there would let random payload bytes match); double
matches must agree to ~1e-14.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import kernels

WINDOW = 8
WORD_SLACK = 4
FIXED_REL_SLACK = 1e-6
DOUBLE_REL_SLACK = 1e-14


@dataclass(frozen=True)
class Hit:
    entry: int
    direction: int
    iteration: int
    offset: int
    encoding: str
    label: str
    value: float


def sensitive_values(scenario, trace):
    """``(label, value)`` pairs that must never travel in the clear (zeros dropped)."""
    vals = []
    for i, b in enumerate(scenario.buyers):
        vals.append((f"lambda[{i}]", b.lam))
        vals.append((f"theta[{i}]", b.theta))
    lam, theta = scenario.lambdas, scenario.thetas
    for r in trace.reports:
        t = r.iteration
        for j, p in enumerate(r.prices):
            vals.append((f"price[{t}][{j}]", float(p)))
        purchases, welfares, avg, *_ = kernels.buyer_round_numpy(
            np.asarray(r.prices, float), np.asarray(r.states, float), lam, theta,
            scenario.params.eta2)
        terms = 0.5 * theta[None, :] * purchases * purchases
        for j in range(purchases.shape[0]):
            vals.append((f"welfare[{t}][{j}]", float(welfares[j])))
            for i in range(purchases.shape[1]):
                vals.append((f"purchase[{t}][{j}][{i}]", float(purchases[j, i])))
                vals.append((f"welfare_term[{t}][{j}][{i}]", float(terms[j, i])))
        vals.append((f"avg_welfare[{t}]", float(avg)))
    return [(k, v) for k, v in vals if v != 0.0]


class _Index:
    def __init__(self, values):
        order = sorted(values, key=lambda kv: kv[1])
        self.labels = [k for k, _ in order]
        self.values = np.array([v for _, v in order], dtype=float)

    def match(self, candidates, abs_tol, rel_tol):
        """Positions in ``candidates`` within tolerance of some value, and that value's index."""
        vals = self.values
        if vals.size == 0 or candidates.size == 0:
            return np.empty(0, int), np.empty(0, int)
        finite = np.isfinite(candidates)
        c = np.where(finite, candidates, np.inf)
        pos = np.clip(np.searchsorted(vals, c), 1, vals.size - 1) if vals.size > 1 else \
            np.zeros(c.shape, int)
        lo = np.maximum(pos - 1, 0)
        d_lo = np.abs(c - vals[lo])
        d_hi = np.abs(c - vals[pos])
        best = np.where(d_lo <= d_hi, lo, pos)
        dist = np.minimum(d_lo, d_hi)
        ok = finite & (dist <= abs_tol + rel_tol * np.abs(vals[best]))
        where = np.nonzero(ok)[0]
        return where, best[where]


def _windows(data):
    buf = np.frombuffer(data, dtype=np.uint8)
    if buf.size < WINDOW:
        return np.empty((0, WINDOW), np.uint8)
    return np.lib.stride_tricks.sliding_window_view(buf, WINDOW).copy()


def scan_entries(entries, values, scale_bits=20):
    index = _Index(values)
    readings = []
    for bits, rel in ((scale_bits, FIXED_REL_SLACK), (2 * scale_bits, 0.0)):
        for order in ("be", "le"):
            readings.append((f"fx{bits}{order}", "><"[order == "le"] + "i8",
                             1.0 / (1 << bits), WORD_SLACK / (1 << bits), rel))
    for order in ("be", "le"):
        readings.append((f"f64{order}", "><"[order == "le"] + "f8", None, 0.0, DOUBLE_REL_SLACK))

    hits = []
    for idx, e in enumerate(entries):
        win = _windows(e.data)
        if not len(win):
            continue
        for enc, dtype, scale, abs_tol, rel_tol in readings:
            raw = win.view(dtype).ravel()
            with np.errstate(all="ignore"):
                cand = raw.astype(float) * scale if scale is not None else raw.astype(float)
            where, which = index.match(cand, abs_tol, rel_tol)
            for off, k in zip(where.tolist(), which.tolist()):
                hits.append(Hit(idx, int(e.direction), e.iteration, off, enc,
                                index.labels[k], float(index.values[k])))
    return hits


def transcript_scan(transcript, scenario, trace, scale_bits=20):
    """Every plaintext image of a sensitive value in the transcript; empty when private."""
    return scan_entries(list(transcript), sensitive_values(scenario, trace), scale_bits)
