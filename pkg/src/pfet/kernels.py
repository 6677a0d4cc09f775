"""Inner loops of one market iteration.

Two interchangeable implementations are kept: ``*_numpy`` (vectorised) and
``*_numba`` (explicit loops under ``@njit``). ``buyer_round`` and
``price_step`` dispatch to one of them according to :data:`pfet._jit.USE_NUMBA`.
"""
import numpy as np

from ._jit import USE_NUMBA, njit


def buyer_round_numpy(prices, states, lam, theta, eta2):
    raw = (lam[None, :] - prices[:, None]) / theta[None, :]
    n_clamped = int(np.count_nonzero(raw < 0.0))
    purchases = np.maximum(raw, 0.0)
    welfares = 0.5 * (theta[None, :] * purchases * purchases).sum(axis=1)
    avg = float(np.dot(states, welfares))
    demands = states * purchases.sum(axis=1)
    new_states = states + eta2 * states * (welfares - avg)
    return purchases, welfares, avg, demands, new_states, n_clamped


@njit(cache=True)
def buyer_round_numba(prices, states, lam, theta, eta2):
    ns = prices.shape[0]
    nb = lam.shape[0]
    purchases = np.empty((ns, nb))
    welfares = np.zeros(ns)
    totals = np.zeros(ns)
    n_clamped = 0
    for j in range(ns):
        for i in range(nb):
            x = (lam[i] - prices[j]) / theta[i]
            if x < 0.0:
                x = 0.0
                n_clamped += 1
            purchases[j, i] = x
            welfares[j] += theta[i] * x * x
            totals[j] += x
        welfares[j] *= 0.5
    avg = 0.0
    for j in range(ns):
        avg += states[j] * welfares[j]
    demands = np.empty(ns)
    new_states = np.empty(ns)
    for j in range(ns):
        demands[j] = states[j] * totals[j]
        new_states[j] = states[j] + eta2 * states[j] * (welfares[j] - avg)
    return purchases, welfares, avg, demands, new_states, n_clamped


def price_step_numpy(prices, demands, supplies, eta1, lo, hi):
    return np.clip(prices + eta1 * (demands - supplies), lo, hi)


@njit(cache=True)
def price_step_numba(prices, demands, supplies, eta1, lo, hi):
    out = np.empty_like(prices)
    for j in range(prices.shape[0]):
        p = prices[j] + eta1 * (demands[j] - supplies[j])
        out[j] = min(hi, max(lo, p))
    return out


if USE_NUMBA:
    buyer_round = buyer_round_numba
    price_step = price_step_numba
else:
    buyer_round = buyer_round_numpy
    price_step = price_step_numpy

BACKEND = "numba" if USE_NUMBA else "numpy"
