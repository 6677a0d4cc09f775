"""Scenario files: TOML text describing params, sellers, buyers and run mode.

Grammar (all tables optional except ``sellers`` and ``buyers``)::

    mode = "plaintext" | "encrypted"
    [params]   rho_sell, rho_buy, eta1, eta2, epsilon, max_iters, lambda_max
    [scheme]   scale_bits, depth_budget
    [[sellers]] id, supply, initial_price
    [[buyers]]  id, lambda, theta, count (optional; expands to id1..idN)
"""
from __future__ import annotations

import re
import sys
from dataclasses import dataclass, field, fields
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import ParseError, ValidationError
from .he import SchemeParams
from .market import BuyerProfile, MarketParams, MarketScenario, SellerProfile

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

MODES = ("plaintext", "encrypted")
_TOP_KEYS = {"mode", "params", "scheme", "sellers", "buyers"}


@dataclass(frozen=True)
class ScenarioFile:
    scenario: MarketScenario
    mode: str = "plaintext"
    scheme: SchemeParams = field(default_factory=SchemeParams)

    @property
    def params(self):
        return self.scenario.params

    @property
    def sellers(self):
        return self.scenario.sellers

    @property
    def buyers(self):
        return self.scenario.buyers


def bundled_path(name="fig3.scenario") -> Path:
    return Path(str(resources.files("pfet") / "data" / name))


class _Collector:
    def __init__(self):
        self.problems = []

    def number(self, table, key, path, default=None, integer=False):
        if key not in table:
            if default is None:
                self.problems.append((path, "missing"))
            return default
        v = table[key]
        ok = isinstance(v, int) if integer else isinstance(v, (int, float))
        if isinstance(v, bool) or not ok:
            kind = "an integer" if integer else "a number"
            self.problems.append((path, f"must be {kind}, got {v!r}"))
            return default
        return v

    def unknown(self, table, allowed, prefix):
        for k in sorted(set(table) - set(allowed)):
            self.problems.append((f"{prefix}{k}", "unknown key"))


def _build(doc) -> ScenarioFile:
    col = _Collector()
    col.unknown(doc, _TOP_KEYS, "")

    mode = doc.get("mode", "plaintext")
    if mode not in MODES:
        col.problems.append(("mode", f"must be one of {MODES}, got {mode!r}"))
        mode = "plaintext"

    p = doc.get("params", {})
    defaults = MarketParams()
    names = [f.name for f in fields(MarketParams)]
    col.unknown(p, names, "params.")
    params = MarketParams(**{
        n: col.number(p, n, f"params.{n}", getattr(defaults, n), integer=(n == "max_iters"))
        for n in names
    })

    s = doc.get("scheme", {})
    sdef = SchemeParams()
    col.unknown(s, ["scale_bits", "depth_budget"], "scheme.")
    scheme = SchemeParams(
        scale_bits=col.number(s, "scale_bits", "scheme.scale_bits", sdef.scale_bits, True),
        depth_budget=col.number(s, "depth_budget", "scheme.depth_budget", sdef.depth_budget, True),
    )
    col.problems.extend(scheme.problems())

    sellers = []
    for k, t in enumerate(doc.get("sellers", [])):
        pre = f"sellers[{k}]"
        col.unknown(t, ["id", "supply", "initial_price"], pre + ".")
        sellers.append(SellerProfile(
            str(t.get("id", f"s{k + 1}")),
            col.number(t, "supply", f"{pre}.supply", float("nan")),
            col.number(t, "initial_price", f"{pre}.initial_price", float("nan")),
        ))

    buyers = []
    for k, t in enumerate(doc.get("buyers", [])):
        pre = f"buyers[{k}]"
        col.unknown(t, ["id", "lambda", "theta", "count"], pre + ".")
        lam = col.number(t, "lambda", f"{pre}.lambda", float("nan"))
        theta = col.number(t, "theta", f"{pre}.theta", float("nan"))
        base = str(t.get("id", f"b{k + 1}"))
        if "count" in t:
            n = col.number(t, "count", f"{pre}.count", 0, integer=True)
            if n < 1:
                col.problems.append((f"{pre}.count", "must be >= 1"))
            buyers.extend(BuyerProfile(f"{base}{i + 1}", lam, theta) for i in range(n))
        else:
            buyers.append(BuyerProfile(base, lam, theta))

    scenario = MarketScenario(params, sellers, buyers)
    for path, msg in scenario.problems():
        # expanded buyer indices do not map back to tables one-to-one
        if (path, msg) not in col.problems:
            col.problems.append((path, msg))
    if col.problems:
        raise ValidationError(col.problems)
    return ScenarioFile(scenario, mode, scheme)


def parse_scenario(text: str) -> ScenarioFile:
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        line = getattr(exc, "lineno", None)
        if line is None:
            m = re.search(r"line (\d+)", str(exc))
            line = int(m.group(1)) if m else None
        raise ParseError(str(exc), line=line) from exc
    return _build(doc)


def load_scenario(path) -> ScenarioFile:
    return parse_scenario(Path(path).read_text(encoding="utf-8"))


def generate_scenario(n_sellers, n_buyers, seed=0, params=None) -> MarketScenario:
    """Synthetic market: identical buyers (lambda 20.1, theta 0.5), random supplies and prices."""
    params = params or MarketParams()
    rng = np.random.default_rng(seed)
    supplies = rng.uniform(10.0, 20.0, n_sellers)
    prices = rng.uniform(params.rho_sell, params.rho_buy, n_sellers)
    sellers = [SellerProfile(f"s{j + 1}", float(s), float(p))
               for j, (s, p) in enumerate(zip(supplies, prices))]
    buyers = [BuyerProfile(f"b{i + 1}", 20.1, 0.5) for i in range(n_buyers)]
    return MarketScenario(params, sellers, buyers)
