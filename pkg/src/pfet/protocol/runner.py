"""Full encrypted trading period: sellers <-> buyers until demand meets supply."""
from __future__ import annotations

from ..errors import NonConvergence
from ..he import SchemeParams, ShadowProvider
from ..market import IterationReport, MarketScenario, RunTrace
from .engines import Aggregator, BuyerEngine, SellerEngine
from .messages import Transcript

AGGREGATOR_INDEX = 0


class ProtocolSession:
    """Both sides of one trading period, advanced a round at a time.

    Every message is serialised, appended to the transcript and parsed back
    on the receiving side, so nothing reaches the other party except bytes.
    """

    def __init__(self, scenario: MarketScenario, provider=None, seed=0):
        scenario.validate()
        self.scenario = scenario
        self.provider = provider if provider is not None else ShadowProvider(SchemeParams())
        self.seller = SellerEngine(scenario, self.provider, self.provider.keygen(seed))
        self.buyers = [BuyerEngine(b, self.provider) for b in scenario.buyers]
        self.aggregator = Aggregator(scenario.buyers[AGGREGATOR_INDEX], self.provider,
                                     scenario.params.eta2)
        self.transcript = Transcript()
        self.iteration = 0
        self.done = False

    def step(self) -> IterationReport:
        it = self.iteration + 1
        seller = self.seller
        prices, states = seller.prices, seller.states
        msg1 = self.transcript.send(seller.open_round(it), it, "sellers")
        shares = []
        for k, buyer in enumerate(self.buyers):
            share = buyer.contribute(msg1, it)
            if k != AGGREGATOR_INDEX:
                share = self.transcript.send(share, it, buyer.profile.id)
            shares.append(share)
        msg2 = self.transcript.send(self.aggregator.combine(msg1, shares), it, "aggregator")
        out = seller.close_round(msg2)
        self.iteration = it
        self.done = out.converged
        return IterationReport(
            iteration=it,
            prices=prices,
            states=states,
            demands=out.demands,
            prices_after=out.prices,
            states_after=out.states,
            converged=out.converged,
            best_response_evals=self.scenario.n_sellers * self.scenario.n_buyers,
        )


def run_protocol(scenario: MarketScenario, provider=None, *, seed=0, strict=False) -> RunTrace:
    """Run the protocol to convergence; the returned trace carries ``.transcript``."""
    session = ProtocolSession(scenario, provider, seed)
    trace = RunTrace(mode="encrypted", supplies=scenario.supplies)
    trace.transcript = session.transcript
    while session.iteration < scenario.params.max_iters:
        trace.reports.append(session.step())
        if session.done:
            break
    if strict and not trace.converged:
        raise NonConvergence(f"no equilibrium after {trace.iterations} encrypted rounds", trace)
    return trace
