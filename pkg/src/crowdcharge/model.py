"""Node and battery state plus the energy-transfer and battery-aging equations.

Everything here is a pure function over frozen dataclasses. SOC values and
session deltas are percentages of nominal capacity; degradation is in
percentage points of capacity lost.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

EPS = 1e-9


class DomainError(ValueError):
    """An operation was called outside its mathematical domain."""


class RoundState(str, Enum):
    INCOMPLETE = "Incomplete"
    COMPLETE = "Complete"


@dataclass(frozen=True)
class AgingParams:
    p_r: float = 20.0
    c_max: int = 500

    def __post_init__(self):
        if self.p_r <= 0 or self.c_max <= 0:
            raise DomainError(f"p_r and c_max must be positive, got {self.p_r}, {self.c_max}")

    @property
    def per_cycle(self) -> float:
        """Capacity lost per completed cycle."""
        return self.p_r / self.c_max


@dataclass(frozen=True)
class NodeState:
    id: int
    soc: float
    location: int = 0
    completed_cycles: int = 0
    charge_accum: float = 0.0
    discharge_accum: float = 0.0
    degradation: float = 0.0
    round_state: RoundState = RoundState.INCOMPLETE
    sent_total: float = 0.0
    received_total: float = 0.0
    drained_total: float = 0.0
    # Values at t=0; used by the final-SOC ledger and the capacity metric.
    initial_soc: float = 0.0
    base_degradation: float = 0.0


@dataclass(frozen=True)
class ChargingSession:
    node_id: int
    delta_charge: float = 0.0
    delta_discharge: float = 0.0
    delta_idle: float = 0.0
    participated: bool = False
    soc_at_start: float = 50.0

    def __post_init__(self):
        for name in ("delta_charge", "delta_discharge", "delta_idle"):
            v = getattr(self, name)
            if not -EPS <= v <= 100 + EPS:
                raise DomainError(f"{name}={v} outside [0, 100]")
        if self.participated:
            if self.delta_idle > EPS:
                raise DomainError("participating session cannot carry idle drain")
            if self.delta_charge > EPS and self.delta_discharge > EPS:
                raise DomainError("a session either charges or discharges, not both")
        elif self.delta_charge > EPS or self.delta_discharge > EPS:
            raise DomainError("idle session cannot charge or discharge")


def new_node(id: int, soc: float, completed_cycles: int, params: AgingParams, location: int = 0) -> NodeState:
    """Fresh node whose degradation accumulator starts at the cycle-count baseline."""
    base = degradation_base(completed_cycles, params)
    return NodeState(
        id=id,
        soc=soc,
        location=location,
        completed_cycles=completed_cycles,
        degradation=base,
        initial_soc=soc,
        base_degradation=base,
    )


def transfer_energy(sender_soc: float, receiver_soc: float, amount: float, beta: float) -> tuple[float, float]:
    """Move ``amount`` out of the sender; the receiver gains ``(1 - beta) * amount``."""
    if not 0 <= beta < 1:
        raise DomainError(f"beta={beta} outside [0, 1)")
    if amount < 0 or amount > sender_soc + EPS:
        raise DomainError(f"amount={amount} not in [0, sender_soc={sender_soc}]")
    gained = (1 - beta) * amount
    if receiver_soc + gained > 100 + EPS:
        raise DomainError(f"receiver would reach {receiver_soc + gained} > 100")
    return sender_soc - amount, receiver_soc + gained


def update_cycle_count(node: NodeState, session: ChargingSession, params: AgingParams | None = None) -> NodeState:
    """Advance the cycle accumulators by one session.

    Charging feeds one accumulator; discharging and idle usage feed the other.
    A cycle completes once both have reached 100, after which both drop by 100
    and any overshoot carries into the next cycle. An accumulator that reaches
    100 first saturates there until the other catches up.
    """
    charge = node.charge_accum + session.delta_charge
    discharge = node.discharge_accum + session.delta_discharge + session.delta_idle
    cycles = node.completed_cycles
    if charge >= 100 - EPS and discharge >= 100 - EPS:
        charge = max(charge - 100, 0.0)
        discharge = max(discharge - 100, 0.0)
        if params is None or cycles < params.c_max:
            cycles += 1
    charge = min(charge, 100.0)
    discharge = min(discharge, 100.0)
    return replace(node, completed_cycles=cycles, charge_accum=charge, discharge_accum=discharge)


def degradation_base(completed_cycles: int, params: AgingParams) -> float:
    return completed_cycles * params.per_cycle


def degradation_wcc(delta_charge: float, delta_discharge: float, completed_cycles: int, params: AgingParams) -> float:
    """Capacity lost by charging or discharging during a peer exchange.

    Scales with the fraction of a full cycle moved and with how many cycles the
    battery has already been through.
    """
    return ((delta_charge + delta_discharge) / 200) * ((1 + completed_cycles) / params.c_max) * params.per_cycle


def degradation_nowcc(delta_idle: float, soc: float, params: AgingParams) -> float:
    """Capacity lost by ordinary usage; zero at SOC 50, worst at 0 or 100."""
    return (delta_idle / 200) * abs(1 - soc / 50) * params.per_cycle


def session_increment(node: NodeState, session: ChargingSession, params: AgingParams) -> float:
    if session.participated:
        return degradation_wcc(session.delta_charge, session.delta_discharge, node.completed_cycles, params)
    return degradation_nowcc(session.delta_idle, session.soc_at_start, params)


def apply_session(node: NodeState, session: ChargingSession, params: AgingParams) -> NodeState:
    """Add one session's degradation, then advance the cycle counter.

    The increment uses the pre-session cycle count. Total degradation never
    exceeds ``p_r``.
    """
    if session.node_id != node.id:
        raise DomainError(f"session for node {session.node_id} applied to node {node.id}")
    inc = session_increment(node, session, params)
    degradation = min(node.degradation + inc, max(params.p_r, node.degradation))
    return update_cycle_count(replace(node, degradation=degradation), session, params)
