import pytest

from trn import smart_house
from trn.atn import tightened_bounds
from trn.cp import SolverConfig, encode_as_stcs, solve
from trn.resource import resource_consistent_schedule
from trn.temporal import check_schedule


@pytest.fixture(scope="module")
def solved():
    trn = smart_house.build()
    return trn, solve(trn, SolverConfig(deadline=10))


def at(trn, res, name):
    return res.schedule[trn.names.index(name)]


def test_consistent_with_budget(solved):
    trn, res = solved
    assert res.consistent
    assert res.risk_bound <= 1 - smart_house.PROBABILITY + 1e-12


def test_schedule_respects_tightened_windows(solved):
    trn, res = solved
    links, _ = tightened_bounds(trn.atn, encode_as_stcs(res.ordering))
    idx = trn.names.index
    _, arrival_lo, arrival_hi = links[idx("arrival")]
    _, sunset_lo, _ = links[idx("sunset")]
    day = at(trn, res, "day_start")
    assert at(trn, res, "wash_end") <= day + arrival_lo + 1e-9
    assert at(trn, res, "lights_on") <= day + sunset_lo + 1e-9
    cook_end = at(trn, res, "cook_end")
    assert day + arrival_hi - 15 - 1e-9 <= cook_end <= day + arrival_lo + 15 + 1e-9


def test_durations_and_windows(solved):
    trn, res = solved
    s = lambda name: at(trn, res, name)
    assert s("wash_end") - s("wash_start") == pytest.approx(120)
    assert s("cook_end") - s("cook_start") == pytest.approx(30)
    assert s("lights_off") >= smart_house.MIDNIGHT - 1e-9
    assert 600 - 1e-9 <= s("snack_start") and s("snack_end") <= 660 + 1e-9


def test_resource_profile_under_mean_realisation(solved):
    trn, res = solved
    s = dict(res.schedule)
    for u in trn.atn.udns:
        s[u.target] = s[u.source] + u.dist.mean
    assert check_schedule(trn.atn.base, s)
    assert resource_consistent_schedule(s, trn.resources)


def test_clock():
    assert smart_house.clock(0) == "12:00"
    assert smart_house.clock(300) == "17:00"
    assert smart_house.clock(780) == "01:00"


def test_higher_probability_is_harder():
    assert not solve(smart_house.build(0.99999999)).consistent
