"""Two-agent trade rules.

Every kernel is a pure function: given the two agent states and the
stochastic inputs for this trade it returns the updated pair.  Money (and
commodity, where present) is conserved trade by trade; no agent ever ends
up with negative money, so debt never appears.
"""

from dataclasses import dataclass, replace
from typing import Optional

from .errors import ContractError

__all__ = [
    "AgentState",
    "TradeDraw",
    "TradeOutcome",
    "trade_no_savings",
    "trade_uniform_savings",
    "trade_distributed_savings",
    "trade_angle",
    "trade_minimum_exchange",
    "trade_commodity",
]


@dataclass(frozen=True)
class AgentState:
    """Money, quenched saving propensity and (optionally) commodity of one agent.

    Units follow the M/N = 1 (and C/N = 1) convention: money and commodity
    are measured in average holdings per agent.
    """

    money: float
    lam: float = 0.0
    commodity: Optional[float] = None

    def __post_init__(self):
        if self.money < 0:
            raise ContractError(f"money must be >= 0, got {self.money}")
        if not 0.0 <= self.lam < 1.0:
            raise ContractError(f"lam must be in [0, 1), got {self.lam}")
        if self.commodity is not None and self.commodity < 0:
            raise ContractError(f"commodity must be >= 0, got {self.commodity}")


@dataclass(frozen=True)
class TradeDraw:
    """Stochastic inputs consumed by one trade.

    epsilon is the random sharing fraction; angle_direction picks the winner
    in the one-parameter inequality process; price_sign picks the sign of the
    price fluctuation in the commodity market (+1 or -1).
    """

    epsilon: float = 0.5
    angle_direction: int = 1
    price_sign: int = 1

    def __post_init__(self):
        if not 0.0 <= self.epsilon <= 1.0:
            raise ContractError(f"epsilon must be in [0, 1], got {self.epsilon}")
        if self.angle_direction not in (0, 1):
            raise ContractError("angle_direction must be 0 or 1")
        if self.price_sign not in (-1, 1):
            raise ContractError("price_sign must be -1 or +1")


@dataclass(frozen=True)
class TradeOutcome:
    """Updated pair of agents; accepted=False means the trade was infeasible
    and the states are the unchanged inputs (commodity mode only)."""

    a: AgentState
    b: AgentState
    accepted: bool = True


def trade_no_savings(a: AgentState, b: AgentState, draw: TradeDraw) -> TradeOutcome:
    """Random re-division of the full pooled money of the pair."""
    pool = a.money + b.money
    ma = draw.epsilon * pool
    return TradeOutcome(replace(a, money=ma), replace(b, money=pool - ma))


def trade_uniform_savings(
    a: AgentState, b: AgentState, lam: float, draw: TradeDraw
) -> TradeOutcome:
    """Each agent saves the fraction lam of its own money; the unsaved rest
    is pooled and split randomly."""
    if not 0.0 <= lam < 1.0:
        raise ContractError(f"lam must be in [0, 1), got {lam}")
    pool = (1.0 - lam) * a.money + (1.0 - lam) * b.money
    ma = lam * a.money + draw.epsilon * pool
    mb = lam * b.money + (1.0 - draw.epsilon) * pool
    return TradeOutcome(replace(a, money=ma), replace(b, money=mb))


def trade_distributed_savings(
    a: AgentState, b: AgentState, draw: TradeDraw
) -> TradeOutcome:
    """Like the uniform-savings rule but each agent applies its own quenched
    saving propensity (a.lam, b.lam stay untouched)."""
    pool = (1.0 - a.lam) * a.money + (1.0 - b.lam) * b.money
    ma = a.lam * a.money + draw.epsilon * pool
    mb = b.lam * b.money + (1.0 - draw.epsilon) * pool
    return TradeOutcome(replace(a, money=ma), replace(b, money=mb))


def trade_angle(
    a: AgentState, b: AgentState, w: float, draw: TradeDraw
) -> TradeOutcome:
    """One-parameter inequality process: the direction bit decides which
    agent surrenders the fixed fraction w of its money to the other."""
    if not 0.0 < w < 1.0:
        raise ContractError(f"w must be in (0, 1), got {w}")
    if draw.angle_direction == 1:
        take = w * b.money
        ma, mb = a.money + take, b.money - take
    else:
        take = w * a.money
        ma, mb = a.money - take, b.money + take
    return TradeOutcome(replace(a, money=ma), replace(b, money=mb))


def trade_minimum_exchange(
    a: AgentState, b: AgentState, draw: TradeDraw
) -> TradeOutcome:
    """Each agent stakes min(m_i, m_j); the stake pool is split epsilon to
    one minus epsilon.  A pauper is absorbing, which drives condensation."""
    stake = min(a.money, b.money)
    pool = 2.0 * stake
    ma = (a.money - stake) + draw.epsilon * pool
    mb = (b.money - stake) + (1.0 - draw.epsilon) * pool
    return TradeOutcome(replace(a, money=ma), replace(b, money=mb))


def trade_commodity(
    a: AgentState,
    b: AgentState,
    draw: TradeDraw,
    theta: float,
    lam: Optional[float] = None,
) -> TradeOutcome:
    """Money-and-commodity trade at the fluctuating price p = 1 +/- theta.

    The money update follows the savings rule selected by ``lam``: None uses
    each agent's own quenched propensity, a float applies that single value
    to both (0.0 reduces to the no-savings rule).  Commodity moves against
    money, delta_c = -delta_m / p for both agents, so total money and total
    commodity are each conserved; at theta = 0 every agent's wealth m + c is
    invariant.  If either agent would end up with negative money or
    commodity the trade is rejected and the inputs are returned unchanged.
    """
    if not 0.0 <= theta < 1.0:
        raise ContractError(f"theta must be in [0, 1), got {theta}")
    if a.commodity is None or b.commodity is None:
        raise ContractError("commodity trades require agents with commodity")

    lam_a = a.lam if lam is None else lam
    lam_b = b.lam if lam is None else lam
    pool = (1.0 - lam_a) * a.money + (1.0 - lam_b) * b.money
    ma = lam_a * a.money + draw.epsilon * pool
    mb = lam_b * b.money + (1.0 - draw.epsilon) * pool

    price = 1.0 + theta if draw.price_sign == 1 else 1.0 - theta
    ca = a.commodity - (ma - a.money) / price
    cb = b.commodity - (mb - b.money) / price
    if ma < 0.0 or mb < 0.0 or ca < 0.0 or cb < 0.0:
        return TradeOutcome(a, b, accepted=False)
    return TradeOutcome(
        replace(a, money=ma, commodity=ca),
        replace(b, money=mb, commodity=cb),
    )
