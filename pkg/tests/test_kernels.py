"""Trade kernels: worked examples, conservation and reduction properties."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kinexch import kernels
from kinexch.errors import ContractError
from kinexch.kernels import AgentState, TradeDraw

money = st.floats(min_value=0.0, max_value=1e6, allow_nan=False)
lam_st = st.floats(min_value=0.0, max_value=0.999, allow_nan=False)
eps_st = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)
commodity = st.floats(min_value=0.0, max_value=1e6, allow_nan=False)


# --- worked examples ----------------------------------------------------------

def test_no_savings_splits_the_pool():
    out = kernels.trade_no_savings(
        AgentState(3.0), AgentState(1.0), TradeDraw(epsilon=0.25)
    )
    assert out.a.money == pytest.approx(1.0)
    assert out.b.money == pytest.approx(3.0)
    assert out.accepted


def test_uniform_savings_keeps_the_saved_fraction():
    # each saves half, pool = 0.5*(2+4) = 3, split 3:1
    out = kernels.trade_uniform_savings(
        AgentState(2.0), AgentState(4.0), 0.5, TradeDraw(epsilon=0.75)
    )
    assert out.a.money == pytest.approx(1.0 + 2.25)
    assert out.b.money == pytest.approx(2.0 + 0.75)


def test_distributed_savings_uses_each_agents_propensity():
    a, b = AgentState(1.0, lam=0.8), AgentState(1.0, lam=0.2)
    out = kernels.trade_distributed_savings(a, b, TradeDraw(epsilon=0.5))
    pool = 0.2 * 1.0 + 0.8 * 1.0
    assert out.a.money == pytest.approx(0.8 + 0.5 * pool)
    assert out.b.money == pytest.approx(0.2 + 0.5 * pool)
    assert out.a.lam == 0.8 and out.b.lam == 0.2  # quenched values untouched


def test_angle_moves_fixed_fraction_of_the_loser():
    out = kernels.trade_angle(
        AgentState(1.0), AgentState(2.0), 0.25, TradeDraw(angle_direction=1)
    )
    assert out.a.money == pytest.approx(1.5)
    assert out.b.money == pytest.approx(1.5)
    out = kernels.trade_angle(
        AgentState(1.0), AgentState(2.0), 0.25, TradeDraw(angle_direction=0)
    )
    assert out.a.money == pytest.approx(0.75)
    assert out.b.money == pytest.approx(2.25)


def test_minimum_exchange_pauper_is_absorbing():
    out = kernels.trade_minimum_exchange(
        AgentState(0.0), AgentState(5.0), TradeDraw(epsilon=0.9)
    )
    assert out.a.money == 0.0 and out.b.money == 5.0
    out = kernels.trade_minimum_exchange(
        AgentState(2.0), AgentState(5.0), TradeDraw(epsilon=1.0)
    )
    assert out.a.money == pytest.approx(4.0)
    assert out.b.money == pytest.approx(3.0)


def test_commodity_trade_moves_commodity_against_money():
    a = AgentState(1.0, commodity=1.0)
    b = AgentState(1.0, commodity=1.0)
    out = kernels.trade_commodity(a, b, TradeDraw(epsilon=1.0, price_sign=1), 0.0, lam=0.0)
    # a takes the whole pool: gains 1 money, pays 1 commodity at p = 1
    assert out.a.money == pytest.approx(2.0)
    assert out.a.commodity == pytest.approx(0.0)
    assert out.b.money == pytest.approx(0.0)
    assert out.b.commodity == pytest.approx(2.0)
    assert out.accepted


def test_commodity_trade_rejects_when_commodity_would_go_negative():
    a = AgentState(0.0, commodity=0.0)  # would have to sell commodity it lacks
    b = AgentState(1.0, commodity=1.0)
    out = kernels.trade_commodity(a, b, TradeDraw(epsilon=1.0), 0.0, lam=0.0)
    assert not out.accepted
    assert out.a == a and out.b == b  # inputs returned unchanged


# --- validation ---------------------------------------------------------------

def test_state_and_draw_validation():
    with pytest.raises(ContractError):
        AgentState(-1.0)
    with pytest.raises(ContractError):
        AgentState(1.0, lam=1.0)
    with pytest.raises(ContractError):
        AgentState(1.0, commodity=-0.5)
    with pytest.raises(ContractError):
        TradeDraw(epsilon=1.5)
    with pytest.raises(ContractError):
        TradeDraw(angle_direction=2)
    with pytest.raises(ContractError):
        TradeDraw(price_sign=0)
    with pytest.raises(ContractError):
        kernels.trade_uniform_savings(AgentState(1.0), AgentState(1.0), 1.0, TradeDraw())
    with pytest.raises(ContractError):
        kernels.trade_angle(AgentState(1.0), AgentState(1.0), 0.0, TradeDraw())
    with pytest.raises(ContractError):
        kernels.trade_commodity(AgentState(1.0), AgentState(1.0), TradeDraw(), 0.0)


# --- conservation properties ----------------------------------------------------

@given(ma=money, mb=money, eps=eps_st)
def test_no_savings_conserves_money(ma, mb, eps):
    out = kernels.trade_no_savings(AgentState(ma), AgentState(mb), TradeDraw(epsilon=eps))
    assert out.a.money >= 0 and out.b.money >= 0
    assert math.isclose(out.a.money + out.b.money, ma + mb, rel_tol=1e-12, abs_tol=1e-12)


@given(ma=money, mb=money, la=lam_st, lb=lam_st, eps=eps_st)
def test_distributed_savings_conserves_money(ma, mb, la, lb, eps):
    out = kernels.trade_distributed_savings(
        AgentState(ma, lam=la), AgentState(mb, lam=lb), TradeDraw(epsilon=eps)
    )
    assert out.a.money >= 0 and out.b.money >= 0
    assert math.isclose(out.a.money + out.b.money, ma + mb, rel_tol=1e-12, abs_tol=1e-12)


@given(ma=money, mb=money, eps=eps_st)
def test_minimum_exchange_conserves_money(ma, mb, eps):
    out = kernels.trade_minimum_exchange(AgentState(ma), AgentState(mb), TradeDraw(epsilon=eps))
    assert out.a.money >= 0 and out.b.money >= 0
    assert math.isclose(out.a.money + out.b.money, ma + mb, rel_tol=1e-12, abs_tol=1e-12)


@given(
    ma=money, mb=money, ca=commodity, cb=commodity,
    la=lam_st, lb=lam_st, eps=eps_st,
    theta=st.floats(min_value=0.0, max_value=0.5),
    sign=st.sampled_from([-1, 1]),
)
@settings(max_examples=300)
def test_commodity_trade_conserves_both_quantities(ma, mb, ca, cb, la, lb, eps, theta, sign):
    a = AgentState(ma, lam=la, commodity=ca)
    b = AgentState(mb, lam=lb, commodity=cb)
    out = kernels.trade_commodity(a, b, TradeDraw(epsilon=eps, price_sign=sign), theta)
    tot = ma + mb + ca + cb
    assert math.isclose(out.a.money + out.b.money, ma + mb, rel_tol=1e-9, abs_tol=1e-9 * max(tot, 1))
    assert math.isclose(
        out.a.commodity + out.b.commodity, ca + cb, rel_tol=1e-9, abs_tol=1e-9 * max(tot, 1)
    )
    assert out.a.money >= 0 and out.b.money >= 0
    assert out.a.commodity >= 0 and out.b.commodity >= 0


@given(ma=money, mb=money, ca=commodity, cb=commodity, la=lam_st, lb=lam_st, eps=eps_st)
def test_commodity_trade_at_zero_theta_preserves_each_agents_wealth(ma, mb, ca, cb, la, lb, eps):
    a = AgentState(ma, lam=la, commodity=ca)
    b = AgentState(mb, lam=lb, commodity=cb)
    out = kernels.trade_commodity(a, b, TradeDraw(epsilon=eps), 0.0)
    scale = max(ma + ca, 1.0)
    assert math.isclose(out.a.money + out.a.commodity, ma + ca, rel_tol=1e-9, abs_tol=1e-9 * scale)


# --- reductions between kernels ---------------------------------------------------

@given(ma=money, mb=money, eps=eps_st)
def test_uniform_savings_at_zero_lam_reduces_to_no_savings(ma, mb, eps):
    a, b = AgentState(ma), AgentState(mb)
    d = TradeDraw(epsilon=eps)
    u = kernels.trade_uniform_savings(a, b, 0.0, d)
    n = kernels.trade_no_savings(a, b, d)
    # the two formulas associate the pool differently, so compare at the
    # rounding scale of the pool, not of the (possibly tiny) result
    tol = 1e-12 * (ma + mb + 1.0)
    assert math.isclose(u.a.money, n.a.money, rel_tol=1e-12, abs_tol=tol)
    assert math.isclose(u.b.money, n.b.money, rel_tol=1e-12, abs_tol=tol)


@given(ma=money, mb=money, lam=lam_st, eps=eps_st)
def test_distributed_savings_with_equal_lams_reduces_to_uniform(ma, mb, lam, eps):
    d = TradeDraw(epsilon=eps)
    dd = kernels.trade_distributed_savings(
        AgentState(ma, lam=lam), AgentState(mb, lam=lam), d
    )
    u = kernels.trade_uniform_savings(AgentState(ma), AgentState(mb), lam, d)
    assert math.isclose(dd.a.money, u.a.money, rel_tol=1e-12, abs_tol=1e-12)
    assert math.isclose(dd.b.money, u.b.money, rel_tol=1e-12, abs_tol=1e-12)


@given(ma=money, mb=money, la=lam_st, lb=lam_st, eps=eps_st)
def test_commodity_money_update_matches_distributed_savings(ma, mb, la, lb, eps):
    d = TradeDraw(epsilon=eps)
    ref = kernels.trade_distributed_savings(
        AgentState(ma, lam=la), AgentState(mb, lam=lb), d
    )
    # enough commodity that the trade can never be rejected
    big = ma + mb + 1.0
    out = kernels.trade_commodity(
        AgentState(ma, lam=la, commodity=big), AgentState(mb, lam=lb, commodity=big), d, 0.0
    )
    assert out.accepted
    assert math.isclose(out.a.money, ref.a.money, rel_tol=1e-12, abs_tol=1e-12)
    assert math.isclose(out.b.money, ref.b.money, rel_tol=1e-12, abs_tol=1e-12)
