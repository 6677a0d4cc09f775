"""Plaintext Stackelberg market: sellers post prices, buyers best-respond.

The leader side moves prices by excess demand (clamped to the FiT/retail
band); the follower side picks quantities, aggregates welfare per seller
and shifts its seller-selection probabilities with a replicator step.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .errors import InputError, NonConvergence, SimplexDriftError, ValidationError

SIMPLEX_DRIFT_LIMIT = 1e-6


@dataclass(frozen=True)
class MarketParams:
    rho_sell: float = 4.0
    rho_buy: float = 20.0
    eta1: float = 0.15
    eta2: float = 1e-4
    epsilon: float = 0.01
    max_iters: int = 10_000
    lambda_max: float = 25.0

    def problems(self, prefix="params"):
        out = []
        if not 0 <= self.rho_sell < self.rho_buy:
            out.append((f"{prefix}.rho_sell", "need 0 <= rho_sell < rho_buy"))
        for name in ("eta1", "eta2", "epsilon"):
            if not getattr(self, name) > 0:
                out.append((f"{prefix}.{name}", "must be > 0"))
        if int(self.max_iters) != self.max_iters or self.max_iters < 1:
            out.append((f"{prefix}.max_iters", "must be an integer >= 1"))
        if not self.lambda_max > self.rho_buy:
            out.append((f"{prefix}.lambda_max", "must exceed rho_buy"))
        return out


@dataclass(frozen=True)
class SellerProfile:
    id: str
    supply: float
    initial_price: float


@dataclass(frozen=True)
class BuyerProfile:
    id: str
    lam: float
    theta: float


@dataclass(frozen=True)
class MarketScenario:
    params: MarketParams
    sellers: tuple[SellerProfile, ...]
    buyers: tuple[BuyerProfile, ...]

    def __post_init__(self):
        object.__setattr__(self, "sellers", tuple(self.sellers))
        object.__setattr__(self, "buyers", tuple(self.buyers))

    @property
    def n_sellers(self):
        return len(self.sellers)

    @property
    def n_buyers(self):
        return len(self.buyers)

    @property
    def supplies(self):
        return np.array([s.supply for s in self.sellers], dtype=float)

    @property
    def initial_prices(self):
        return np.array([s.initial_price for s in self.sellers], dtype=float)

    @property
    def lambdas(self):
        return np.array([b.lam for b in self.buyers], dtype=float)

    @property
    def thetas(self):
        return np.array([b.theta for b in self.buyers], dtype=float)

    def problems(self):
        p = self.params
        out = p.problems()
        if not self.sellers:
            out.append(("sellers", "at least one seller required"))
        if not self.buyers:
            out.append(("buyers", "at least one buyer required"))
        for k, s in enumerate(self.sellers):
            if not s.supply > 0:
                out.append((f"sellers[{k}].supply", "must be > 0"))
            if not p.rho_sell <= s.initial_price <= p.rho_buy:
                out.append((f"sellers[{k}].initial_price",
                            f"must lie in [{p.rho_sell}, {p.rho_buy}]"))
        for k, b in enumerate(self.buyers):
            if not b.theta > 0:
                out.append((f"buyers[{k}].theta", "must be > 0"))
            if not p.rho_buy < b.lam <= p.lambda_max:
                out.append((f"buyers[{k}].lambda",
                            f"must lie in ({p.rho_buy}, {p.lambda_max}]"))
        ids = [s.id for s in self.sellers]
        if len(set(ids)) != len(ids):
            out.append(("sellers", "duplicate seller id"))
        ids = [b.id for b in self.buyers]
        if len(set(ids)) != len(ids):
            out.append(("buyers", "duplicate buyer id"))
        return out

    def validate(self):
        problems = self.problems()
        if problems:
            raise ValidationError(problems)
        return self

    def replace(self, **changes):
        """Copy with ``params`` fields and/or ``sellers``/``buyers`` swapped."""
        sellers = changes.pop("sellers", self.sellers)
        buyers = changes.pop("buyers", self.buyers)
        params = self.params
        if changes:
            params = MarketParams(**{**params.__dict__, **changes})
        return MarketScenario(params, sellers, buyers)

    def with_uniform_price(self, price):
        return self.replace(sellers=[
            SellerProfile(s.id, s.supply, float(price)) for s in self.sellers
        ])


@dataclass(frozen=True)
class MarketState:
    prices: np.ndarray
    states: np.ndarray
    iteration: int = 0

    @classmethod
    def initial(cls, scenario: MarketScenario) -> "MarketState":
        n = scenario.n_sellers
        return cls(scenario.initial_prices, np.full(n, 1.0 / n), 0)


@dataclass
class IterationReport:
    """Everything computed in one leader/follower exchange.

    ``prices``/``states`` are the values the iteration started from;
    ``*_after`` are the updated ones. In encrypted runs the seller never
    sees welfare or purchases, so those stay ``None``, and
    ``states_after`` is ``None`` on the converged round (no refresh).
    """
    iteration: int
    prices: np.ndarray
    states: np.ndarray
    demands: np.ndarray
    prices_after: np.ndarray
    states_after: Optional[np.ndarray]
    converged: bool
    welfares: Optional[np.ndarray] = None
    avg_welfare: Optional[float] = None
    purchases: Optional[np.ndarray] = None
    clamped: int = 0
    best_response_evals: int = 0


@dataclass
class RunTrace:
    reports: list[IterationReport] = field(default_factory=list)
    mode: str = "plaintext"
    supplies: Optional[np.ndarray] = None
    transcript: object = None

    @property
    def converged(self):
        return bool(self.reports) and self.reports[-1].converged

    @property
    def iterations(self):
        return len(self.reports)

    @property
    def final_prices(self):
        return self.reports[-1].prices_after

    @property
    def final_demands(self):
        return self.reports[-1].demands

    def column(self, name):
        """Stack a per-iteration vector field into an (iterations, N_S) array."""
        return np.array([getattr(r, name) for r in self.reports])


# --- equations -------------------------------------------------------------

def utility(x, lam, theta):
    return lam * x - 0.5 * theta * x * x


def net_utility(x, price, buyer: BuyerProfile):
    return utility(x, buyer.lam, buyer.theta) - price * x


def best_response(price, buyer: BuyerProfile):
    """Quantity maximising net utility at ``price``; never negative."""
    return max(0.0, (buyer.lam - price) / buyer.theta)


def _same_length(a, b, what):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise InputError(f"{what}: length mismatch {a.shape} vs {b.shape}")
    return a, b


def seller_welfare(purchases_for_j, buyers: Sequence[BuyerProfile]):
    x, theta = _same_length(purchases_for_j, [b.theta for b in buyers], "seller_welfare")
    return float(0.5 * np.sum(theta * x * x))


def average_welfare(welfares, states):
    w, g = _same_length(welfares, states, "average_welfare")
    return float(np.dot(g, w))


def demand_for_seller(state_j, purchases_for_j):
    return float(state_j * np.sum(np.asarray(purchases_for_j, dtype=float)))


def update_states(states, welfares, eta2):
    g, w = _same_length(states, welfares, "update_states")
    avg = float(np.dot(g, w))
    return g + eta2 * g * (w - avg)


def update_prices(prices, demands, supplies, params: MarketParams):
    p, d = _same_length(prices, demands, "update_prices")
    p, s = _same_length(p, supplies, "update_prices")
    return np.clip(p + params.eta1 * (d - s), params.rho_sell, params.rho_buy)


def is_converged(demands, supplies, epsilon):
    return bool(np.max(np.abs(np.asarray(demands) - np.asarray(supplies))) <= epsilon)


# --- loops -----------------------------------------------------------------

def run_iteration(state: MarketState, scenario: MarketScenario):
    params = scenario.params
    supplies = scenario.supplies
    purchases, welfares, avg, demands, new_states, n_clamped = kernels.buyer_round(
        state.prices, state.states, scenario.lambdas, scenario.thetas, params.eta2)
    new_prices = kernels.price_step(state.prices, demands, supplies, params.eta1,
                                    params.rho_sell, params.rho_buy)
    drift = abs(float(np.sum(new_states)) - 1.0)
    if drift > SIMPLEX_DRIFT_LIMIT:
        raise SimplexDriftError(
            f"states sum drifted by {drift:.3e} at iteration {state.iteration + 1}")
    report = IterationReport(
        iteration=state.iteration + 1,
        prices=state.prices,
        states=state.states,
        demands=demands,
        prices_after=new_prices,
        states_after=new_states,
        converged=is_converged(demands, supplies, params.epsilon),
        welfares=welfares,
        avg_welfare=avg,
        purchases=purchases,
        clamped=n_clamped,
        best_response_evals=scenario.n_sellers * scenario.n_buyers,
    )
    return MarketState(new_prices, new_states, state.iteration + 1), report


def run_to_equilibrium(scenario: MarketScenario, strict=False) -> RunTrace:
    """Iterate until every |D_j - S_j| <= epsilon or ``max_iters`` is hit.

    With ``strict`` a non-converged run raises :class:`NonConvergence`
    (the trace rides along on the exception); otherwise the trace is
    returned with ``converged == False``.
    """
    scenario.validate()
    state = MarketState.initial(scenario)
    trace = RunTrace(mode="plaintext", supplies=scenario.supplies)
    for _ in range(int(scenario.params.max_iters)):
        state, report = run_iteration(state, scenario)
        trace.reports.append(report)
        if report.converged:
            break
    if strict and not trace.converged:
        raise NonConvergence(
            f"no equilibrium after {trace.iterations} iterations", trace)
    return trace


def equilibrium_price(scenario: MarketScenario):
    """Common clearing price when all buyers share (lambda, theta) and no clamp binds.

    At a replicator rest point all welfares are equal, hence all prices;
    demand then sums to ``N_B (lambda - p) / theta`` = total supply.
    """
    lam = scenario.lambdas
    theta = scenario.thetas
    if not (np.all(lam == lam[0]) and np.all(theta == theta[0])):
        raise InputError("closed form needs homogeneous buyers")
    p = lam[0] - theta[0] * float(scenario.supplies.sum()) / scenario.n_buyers
    if not math.isfinite(p):
        raise InputError("non-finite equilibrium price")
    return p
