import numpy as np
import pytest

from pfet.errors import DepthExhausted, KeyMismatch, ProtocolError
from pfet.he import CountingProvider, SchemeParams, ShadowProvider, encode_fixed
from pfet.market import BuyerProfile, MarketState, run_iteration, run_to_equilibrium
from pfet.protocol import (BuyerShare, Direction, Msg1, Msg2, ProtocolSession, buyer_aggregate_demand,
                           buyer_average_welfare, buyer_compute_purchases,
                           buyer_compute_welfare_terms, buyer_compute_welfares,
                           buyer_update_states, decode_message, encode_message, run_protocol,
                           seller_finalize_round, seller_init_round)

from conftest import make_scenario


@pytest.fixture
def prov():
    return ShadowProvider(SchemeParams())


@pytest.fixture
def keys(prov):
    return prov.keygen(seed=0)


def enc(prov, keys, values):
    return tuple(prov.encrypt(keys.public_key, v) for v in values)


def dec(prov, keys, cts):
    return np.array([prov.decrypt(keys.secret_key, c) for c in cts])


def msg1_for(prov, keys, prices, states=None):
    states = states if states is not None else [1 / len(prices)] * len(prices)
    return seller_init_round(prices, states, keys, provider=prov)


class TestSellerInit:
    def test_round_trip(self, prov, keys):
        prices = [9.0, 17.0, 14.3]
        m = msg1_for(prov, keys, prices)
        assert np.all(np.abs(dec(prov, keys, m.enc_prices) - prices) <= 2 ** -20)
        assert all(c.level == 0 for c in m.enc_prices + m.enc_states)

    def test_initial_states_uniform(self, prov, keys, fig3):
        state = MarketState.initial(fig3)
        m = seller_init_round(state.prices, state.states, keys, provider=prov)
        np.testing.assert_allclose(dec(prov, keys, m.enc_states), 0.1, atol=2 ** -20)

    def test_no_price_images(self, prov, keys):
        prices = [9.0, 17.0, 14.0, 19.0]
        data = encode_message(msg1_for(prov, keys, prices), 1)
        for p in prices:
            assert np.float64(p).tobytes() not in data
            assert np.float64(p).byteswap().tobytes() not in data
            assert encode_fixed(p, 20).to_bytes(8, "big", signed=True) not in data
            assert encode_fixed(p, 20).to_bytes(8, "little", signed=True) not in data


class TestBuyerPurchases:
    def test_value(self, prov, keys):
        m = msg1_for(prov, keys, [9.0])
        (x,) = buyer_compute_purchases(m, BuyerProfile("b", 20.1, 0.5), provider=prov)
        assert prov.decrypt(keys.secret_key, x) == pytest.approx(22.2, abs=1e-5)

    def test_indifference(self, prov, keys):
        m = msg1_for(prov, keys, [20.1])
        (x,) = buyer_compute_purchases(m, BuyerProfile("b", 20.1, 0.5), provider=prov)
        assert abs(prov.decrypt(keys.secret_key, x)) <= 2 ** -20

    def test_one_multiplication_per_seller(self, keys):
        inner = ShadowProvider()
        k = inner.keygen(seed=0)
        m = seller_init_round([9.0, 10.0, 11.0, 12.0], [0.25] * 4, k, provider=inner)
        counting = CountingProvider(inner)
        buyer_compute_purchases(m, BuyerProfile("b", 21.0, 0.7), provider=counting)
        assert counting.counts["mul_plain"] + counting.counts["mul"] == 4


class TestAggregateDemand:
    def test_value(self, prov, keys):
        states = enc(prov, keys, [0.5])
        purchases = [enc(prov, keys, [22.2]), enc(prov, keys, [22.2])]
        (d,) = buyer_aggregate_demand(states, purchases, provider=prov, eval_key=keys.eval_key)
        assert prov.decrypt(keys.secret_key, d) == pytest.approx(22.2, abs=1e-4)

    def test_zero_state(self, prov, keys):
        (d,) = buyer_aggregate_demand(enc(prov, keys, [0.0]), [enc(prov, keys, [13.0])],
                                      provider=prov, eval_key=keys.eval_key)
        assert prov.decrypt(keys.secret_key, d) == 0.0

    def test_single_buyer(self, prov, keys):
        (d,) = buyer_aggregate_demand(enc(prov, keys, [1.0]), [enc(prov, keys, [13.5])],
                                      provider=prov, eval_key=keys.eval_key)
        assert prov.decrypt(keys.secret_key, d) == pytest.approx(13.5, abs=2 ** -20)


class TestWelfares:
    def test_fig3_matches_plaintext(self, prov, keys, fig3):
        state = MarketState.initial(fig3)
        m = seller_init_round(state.prices, state.states, keys, provider=prov)
        terms = [buyer_compute_welfare_terms(m, b, provider=prov) for b in fig3.buyers]
        w = dec(prov, keys, buyer_compute_welfares(terms, fig3.n_sellers, provider=prov))
        _, rep = run_iteration(state, fig3)
        np.testing.assert_allclose(w, rep.welfares, atol=1e-3)

    def test_one_buyer(self, prov, keys):
        m = msg1_for(prov, keys, [9.0])
        terms = [buyer_compute_welfare_terms(m, BuyerProfile("b", 20.1, 0.5), provider=prov)]
        (w,) = buyer_compute_welfares(terms, 1, provider=prov)
        assert prov.decrypt(keys.secret_key, w) == pytest.approx(123.21, abs=1e-3)

    def test_zero(self, prov, keys):
        terms = [enc(prov, keys, [0.0, 0.0])] * 3
        assert np.all(dec(prov, keys, buyer_compute_welfares(terms, 2, provider=prov)) == 0.0)


class TestAverageWelfare:
    @pytest.mark.parametrize("states,welfares,expected", [
        ([0.6, 0.4], [100.0, 50.0], 80.0),
        ([0.2, 0.3, 0.5], [42.0, 42.0, 42.0], 42.0),
        ([0.5, 0.5], [0.0, 0.0], 0.0),
    ])
    def test_values(self, prov, keys, states, welfares, expected):
        avg = buyer_average_welfare(enc(prov, keys, states), enc(prov, keys, welfares),
                                    provider=prov, eval_key=keys.eval_key)
        assert prov.decrypt(keys.secret_key, avg) == pytest.approx(expected, abs=1e-3)


class TestUpdateStates:
    def _run(self, prov, keys, states, welfares):
        g, w = enc(prov, keys, states), enc(prov, keys, welfares)
        avg = buyer_average_welfare(g, w, provider=prov, eval_key=keys.eval_key)
        return dec(prov, keys, buyer_update_states(g, w, avg, 1e-4, provider=prov,
                                                   eval_key=keys.eval_key))

    def test_value(self, prov, keys):
        np.testing.assert_allclose(self._run(prov, keys, [0.6, 0.4], [100, 50]), [0.6012, 0.3988],
                                   atol=1e-4)

    def test_equal_welfare(self, prov, keys):
        np.testing.assert_allclose(self._run(prov, keys, [0.3, 0.7], [55, 55]), [0.3, 0.7],
                                   atol=2 ** -19)

    def test_simplex(self, prov, keys):
        rng = np.random.default_rng(5)
        g = rng.dirichlet(np.ones(8))
        out = self._run(prov, keys, g, rng.uniform(0, 2000, 8))
        assert abs(out.sum() - 1) <= 1e-4


class TestFinalize:
    def test_converged_skips_state_refresh(self, keys):
        inner = ShadowProvider()
        k = inner.keygen(seed=0)
        sc = make_scenario([10.0, 12.0], [10.0, 10.0], n_buyers=1)
        msg2 = Msg2(tuple(inner.encrypt(k.public_key, d) for d in (10.0, 12.0)),
                    tuple(inner.encrypt(k.public_key, g) for g in (0.5, 0.5)))
        counting = CountingProvider(inner)
        out = seller_finalize_round(msg2, k, sc.params, sc.supplies, sc.initial_prices,
                                    provider=counting)
        assert out.converged and out.states is None
        assert counting.counts["decrypt"] == 2

    def test_unconverged_refreshes_states(self, prov, keys):
        sc = make_scenario([10.0, 12.0], [10.0, 10.0], n_buyers=1)
        msg2 = Msg2(enc(prov, keys, [15.0, 12.0]), enc(prov, keys, [0.55, 0.45]))
        out = seller_finalize_round(msg2, keys, sc.params, sc.supplies, sc.initial_prices,
                                    provider=prov)
        assert not out.converged
        np.testing.assert_allclose(out.states, [0.55, 0.45], atol=2 ** -20)
        np.testing.assert_allclose(out.prices, [10.75, 10.0])

    def test_one_round_matches_plaintext(self, fig3):
        session = ProtocolSession(fig3)
        rep = session.step()
        _, ref = run_iteration(MarketState.initial(fig3), fig3)
        for name in ("demands", "prices_after", "states_after"):
            np.testing.assert_allclose(getattr(rep, name), getattr(ref, name), rtol=1e-3)

    def test_wrong_key(self, prov, keys):
        other = prov.keygen(seed=99)
        sc = make_scenario([10.0], [10.0], n_buyers=1)
        forged = Msg2((prov.encrypt(other.public_key, 10.0),), (prov.encrypt(other.public_key, 1.0),))
        with pytest.raises(KeyMismatch):
            seller_finalize_round(forged, keys, sc.params, sc.supplies, sc.initial_prices,
                                  provider=prov)


class TestMessages:
    def test_round_trip(self, prov, keys):
        m1 = msg1_for(prov, keys, [9.0, 11.0])
        for msg in (m1, Msg2(m1.enc_prices, m1.enc_states),
                    BuyerShare(m1.enc_states, m1.enc_prices)):
            data = encode_message(msg, 7)
            assert data[:4] == (7).to_bytes(4, "big")
            it, back = decode_message(data)
            assert it == 7 and back == msg

    def test_direction_bytes(self, prov, keys):
        m1 = msg1_for(prov, keys, [9.0])
        assert encode_message(m1, 1)[4] == Direction.SELLERS_TO_BUYERS
        assert encode_message(Msg2(m1.enc_prices, m1.enc_states), 1)[4] == Direction.BUYERS_TO_SELLERS

    def test_trailing_bytes_rejected(self, prov, keys):
        from pfet.errors import InputError
        data = encode_message(msg1_for(prov, keys, [9.0]), 1)
        with pytest.raises(InputError):
            decode_message(data + b"\0")


class TestRunProtocol:
    def test_fig3_equivalence(self, fig3):
        enc_tr = run_protocol(fig3)
        ref = run_to_equilibrium(fig3)
        assert enc_tr.converged and enc_tr.iterations == ref.iterations
        for name in ("prices", "demands", "states"):
            np.testing.assert_allclose(enc_tr.column(name), ref.column(name), rtol=1e-3)
        np.testing.assert_allclose(enc_tr.final_prices, ref.final_prices, rtol=1e-3)

    def test_refreshed_states_match(self, fig3):
        enc_tr = run_protocol(fig3)
        ref = run_to_equilibrium(fig3)
        for a, b in zip(enc_tr.reports[:-1], ref.reports):
            np.testing.assert_allclose(a.states_after, b.states_after, atol=1e-4)
        assert enc_tr.reports[-1].states_after is None

    def test_single_seller(self):
        sc = make_scenario([30.0], [8.0], n_buyers=3)
        tr = run_protocol(sc)
        assert tr.converged
        for r in tr.reports:
            assert abs(r.states[0] - 1.0) <= 2 ** -19

    def test_multiplication_counts(self):
        sc = make_scenario([12, 15, 18], [9, 10, 11], n_buyers=4)
        prov = CountingProvider(ShadowProvider())
        session = ProtocolSession(sc, prov)
        for _ in range(3):
            prov.reset()
            session.step()
            assert prov.counts["mul"] == 3 * 4 + 3 * 3

    def test_levels_within_budget(self, fig3):
        levels = []
        prov = ShadowProvider()
        orig = prov._make

        def spy(key_id, level, word, nonce):
            levels.append(level)
            return orig(key_id, level, word, nonce)

        prov._make = spy
        run_protocol(fig3, prov)
        assert max(levels) == 6

    def test_tighter_budget_reports_block(self, fig3):
        prov = ShadowProvider()
        prov.params = SchemeParams(depth_budget=2)  # bypasses validation on purpose
        with pytest.raises(ProtocolError) as info:
            run_protocol(fig3, prov)
        assert info.value.block == 5 and isinstance(info.value.cause, DepthExhausted)

    def test_transcript_is_bit_exact(self, fig3):
        a, b = run_protocol(fig3), run_protocol(fig3)
        assert len(a.transcript) == len(b.transcript)
        assert all(x.data == y.data for x, y in zip(a.transcript, b.transcript))

    def test_transcript_layout(self, fig3):
        tr = run_protocol(fig3)
        per_round = 1 + (fig3.n_buyers - 1) + 1
        assert len(tr.transcript) == per_round * tr.iterations
        dirs = [e.direction for e in tr.transcript][:per_round]
        assert dirs[0] == Direction.SELLERS_TO_BUYERS and dirs[-1] == Direction.BUYERS_TO_SELLERS
        assert all(d == Direction.BUYER_TO_AGGREGATOR for d in dirs[1:-1])

    def test_key_confinement(self, fig3):
        session = ProtocolSession(fig3)
        secret = session.seller._keys.secret_key.secret
        for _ in range(3):
            session.step()
        assert all(secret not in e.data for e in session.transcript)
        for engine in session.buyers + [session.aggregator]:
            assert not any(isinstance(v, type(session.seller._keys.secret_key))
                           for v in vars(engine).values())
