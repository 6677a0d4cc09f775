"""Seller-side and buyer-side computations of one encrypted round.

Seller side: encrypt prices and states (blocks 2-3), decrypt demands and
move prices (11-12), decrypt the refreshed states (13). Buyer side, all on
ciphertexts: purchases (5), demands (6), welfares (7), average welfare (8),
replicator step on states (9).

Each buyer squares its own scaled margin before anything leaves it:
``((lam_i - pi_j) / sqrt(2 theta_i))**2 == theta_i / 2 * X_ji**2``, so the
per-buyer welfare term costs one ciphertext multiplication at level 3 and
the whole state update ends at level 6.
"""
from __future__ import annotations

import math
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ..errors import InputError, PfetError, ProtocolError
from ..market import BuyerProfile, MarketParams, is_converged, update_prices
from .messages import BuyerShare, Msg1, Msg2


@contextmanager
def at_block(block):
    """Re-raise provider/market failures tagged with the protocol block number."""
    try:
        yield
    except ProtocolError:
        raise
    except PfetError as exc:
        raise ProtocolError(block, exc) from exc


def seller_init_round(prices, states, keys, *, provider, iteration=1) -> Msg1:
    pk = keys.public_key
    enc_prices = tuple(provider.encrypt(pk, p, f"{iteration}/price/{j}")
                       for j, p in enumerate(prices))
    enc_states = tuple(provider.encrypt(pk, g, f"{iteration}/state/{j}")
                       for j, g in enumerate(states))
    return Msg1(enc_prices, enc_states, pk, keys.eval_key)


def _enc_margins(msg1: Msg1, buyer: BuyerProfile, provider, iteration):
    enc_lam = provider.encrypt(msg1.public_key, buyer.lam, f"{iteration}/lambda/{buyer.id}")
    return [provider.sub(enc_lam, ep) for ep in msg1.enc_prices]


def buyer_compute_purchases(msg1: Msg1, buyer: BuyerProfile, *, provider, iteration=1):
    """E(X_ji) = (E(lam_i) - E(pi_j)) * (1/theta_i) for every seller j."""
    inv_theta = 1.0 / buyer.theta
    return tuple(provider.mul_plain(m, inv_theta)
                 for m in _enc_margins(msg1, buyer, provider, iteration))


def buyer_compute_welfare_terms(msg1: Msg1, buyer: BuyerProfile, *, provider, iteration=1):
    """E(theta_i/2 * X_ji^2) for every seller j, computed inside buyer i."""
    scale = 1.0 / math.sqrt(2.0 * buyer.theta)
    out = []
    for m in _enc_margins(msg1, buyer, provider, iteration):
        y = provider.mul_plain(m, scale)
        out.append(provider.mul(y, y, msg1.eval_key))
    return tuple(out)


def buyer_share(msg1: Msg1, buyer: BuyerProfile, *, provider, iteration=1) -> BuyerShare:
    inv_theta = 1.0 / buyer.theta
    scale = 1.0 / math.sqrt(2.0 * buyer.theta)
    purchases, terms = [], []
    for m in _enc_margins(msg1, buyer, provider, iteration):
        purchases.append(provider.mul_plain(m, inv_theta))
        y = provider.mul_plain(m, scale)
        terms.append(provider.mul(y, y, msg1.eval_key))
    return BuyerShare(tuple(purchases), tuple(terms))


def _columns(rows: Sequence[Sequence], n_sellers, what):
    """Per-buyer rows (N_B x N_S) to per-seller columns."""
    if not rows:
        raise InputError(f"{what}: no buyer rows")
    for r in rows:
        if len(r) != n_sellers:
            raise InputError(f"{what}: expected {n_sellers} entries per buyer, got {len(r)}")
    return [[r[j] for r in rows] for j in range(n_sellers)]


def buyer_aggregate_demand(enc_states, all_purchases, *, provider, eval_key):
    """E(D_j) = E(gamma_j) * sum_i E(X_ji). ``all_purchases`` is indexed [buyer][seller]."""
    cols = _columns(all_purchases, len(enc_states), "buyer_aggregate_demand")
    return tuple(provider.mul(g, provider.sum(col), eval_key)
                 for g, col in zip(enc_states, cols))


def buyer_compute_welfares(all_welfare_terms, n_sellers, *, provider):
    """E(W_Bj) = sum_i E(theta_i/2 * X_ji^2). Terms are indexed [buyer][seller]."""
    return tuple(provider.sum(col)
                 for col in _columns(all_welfare_terms, n_sellers, "buyer_compute_welfares"))


def buyer_average_welfare(enc_states, enc_welfares, *, provider, eval_key):
    if len(enc_states) != len(enc_welfares):
        raise InputError("buyer_average_welfare: length mismatch")
    return provider.sum(provider.mul(g, w, eval_key) for g, w in zip(enc_states, enc_welfares))


def buyer_update_states(enc_states, enc_welfares, enc_avg, eta2, *, provider, eval_key):
    """E(gamma_j + eta2 * gamma_j * (W_Bj - W_avg))."""
    if len(enc_states) != len(enc_welfares):
        raise InputError("buyer_update_states: length mismatch")
    out = []
    for g, w in zip(enc_states, enc_welfares):
        step = provider.mul_plain(provider.mul(g, provider.sub(w, enc_avg), eval_key), eta2)
        out.append(provider.add(g, step))
    return tuple(out)


@dataclass(frozen=True)
class RoundOutcome:
    prices: np.ndarray
    states: Optional[np.ndarray]
    demands: np.ndarray
    converged: bool


def seller_finalize_round(msg2: Msg2, keys, params: MarketParams, supplies, prices,
                          *, provider) -> RoundOutcome:
    sk = keys.secret_key
    demands = np.array([provider.decrypt(sk, c) for c in msg2.enc_demands])
    if demands.shape != np.shape(supplies):
        raise InputError("Msg2 carries the wrong number of demands")
    new_prices = update_prices(prices, demands, supplies, params)
    converged = is_converged(demands, supplies, params.epsilon)
    states = None
    if not converged:
        states = np.array([provider.decrypt(sk, c) for c in msg2.enc_states_next])
    return RoundOutcome(new_prices, states, demands, converged)


class SellerEngine:
    """Seller coalition: owns the key pair and the plaintext prices/states."""

    def __init__(self, scenario, provider, keys):
        self.scenario = scenario
        self.provider = provider
        self._keys = keys
        self.prices = scenario.initial_prices
        self.states = np.full(scenario.n_sellers, 1.0 / scenario.n_sellers)

    @property
    def public_key(self):
        return self._keys.public_key

    def open_round(self, iteration) -> Msg1:
        with at_block(3):
            return seller_init_round(self.prices, self.states, self._keys,
                                     provider=self.provider, iteration=iteration)

    def close_round(self, msg2) -> RoundOutcome:
        with at_block(11):
            out = seller_finalize_round(msg2, self._keys, self.scenario.params,
                                        self.scenario.supplies, self.prices,
                                        provider=self.provider)
        self.prices = out.prices
        if out.states is not None:
            self.states = out.states
        return out


class BuyerEngine:
    """One buyer; knows only its own profile and what Msg1 carries."""

    def __init__(self, profile: BuyerProfile, provider):
        self.profile = profile
        self.provider = provider

    def contribute(self, msg1: Msg1, iteration) -> BuyerShare:
        with at_block(5):
            return buyer_share(msg1, self.profile, provider=self.provider, iteration=iteration)


class Aggregator(BuyerEngine):
    """The buyer that combines every share into Msg2. Holds no secret key."""

    def __init__(self, profile, provider, eta2):
        super().__init__(profile, provider)
        self.eta2 = eta2

    def combine(self, msg1: Msg1, shares: Sequence[BuyerShare]) -> Msg2:
        p, evk = self.provider, msg1.eval_key
        n = len(msg1.enc_prices)
        with at_block(6):
            demands = buyer_aggregate_demand(msg1.enc_states, [s.enc_purchases for s in shares],
                                             provider=p, eval_key=evk)
        with at_block(7):
            welfares = buyer_compute_welfares([s.enc_welfare_terms for s in shares], n,
                                              provider=p)
        with at_block(8):
            avg = buyer_average_welfare(msg1.enc_states, welfares, provider=p, eval_key=evk)
        with at_block(9):
            states = buyer_update_states(msg1.enc_states, welfares, avg, self.eta2,
                                         provider=p, eval_key=evk)
        return Msg2(demands, states)
