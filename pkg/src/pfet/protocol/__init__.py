"""Privacy-friendly two-sided trading protocol over an HE provider."""
from .engines import (Aggregator, BuyerEngine, RoundOutcome, SellerEngine, at_block,
                      buyer_aggregate_demand, buyer_average_welfare, buyer_compute_purchases,
                      buyer_compute_welfare_terms, buyer_compute_welfares, buyer_share,
                      buyer_update_states, seller_finalize_round, seller_init_round)
from .messages import (BuyerShare, Direction, Msg1, Msg2, Transcript, TranscriptEntry,
                       decode_message, encode_message)
from .runner import ProtocolSession, run_protocol
from .scan import Hit, sensitive_values, transcript_scan

__all__ = [
    "Aggregator", "BuyerEngine", "BuyerShare", "Direction", "Hit", "Msg1", "Msg2", "RoundOutcome",
    "ProtocolSession", "SellerEngine", "Transcript", "TranscriptEntry", "at_block", "buyer_aggregate_demand",
    "buyer_average_welfare", "buyer_compute_purchases", "buyer_compute_welfare_terms",
    "buyer_compute_welfares", "buyer_share", "buyer_update_states", "decode_message",
    "encode_message", "run_protocol", "seller_finalize_round", "seller_init_round",
    "sensitive_values", "transcript_scan",
]
