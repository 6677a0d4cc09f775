"""Stackelberg peer-to-peer energy market, plaintext and over homomorphic encryption."""
from .errors import (DepthExhausted, EmptyInput, FixedPointOverflow, InputError, KeyMismatch,
                     NonConvergence, ParseError, PfetError, ProtocolError, SimplexDriftError,
                     ValidationError)
from .market import (BuyerProfile, IterationReport, MarketParams, MarketScenario, MarketState,
                     RunTrace, SellerProfile, average_welfare, best_response, demand_for_seller,
                     net_utility, run_iteration, run_to_equilibrium, seller_welfare,
                     update_prices, update_states, utility)

__version__ = "0.1.0"
