import pytest

from pfet.market import BuyerProfile, MarketParams, MarketScenario, SellerProfile
from pfet.scenario import bundled_path, load_scenario

FIG3_SUPPLIES = [12, 19, 20, 20, 20, 11, 19, 20, 16, 17]
FIG3_PRICES = [9, 17, 14, 19, 6, 8, 14, 17, 20, 11]


def make_scenario(supplies, prices, n_buyers=10, lam=20.1, theta=0.5, **params):
    sellers = [SellerProfile(f"s{j + 1}", float(s), float(p))
               for j, (s, p) in enumerate(zip(supplies, prices))]
    buyers = [BuyerProfile(f"b{i + 1}", lam, theta) for i in range(n_buyers)]
    return MarketScenario(MarketParams(**params), sellers, buyers)


@pytest.fixture
def fig3():
    return make_scenario(FIG3_SUPPLIES, FIG3_PRICES)


@pytest.fixture
def fig3_file():
    return load_scenario(bundled_path())


@pytest.fixture
def buyer():
    return BuyerProfile("b", 20.1, 0.5)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
