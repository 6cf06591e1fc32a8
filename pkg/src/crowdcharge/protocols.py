"""Peer-selection strategies and the exchange rule.

Three strategies are available, selected by id:

``balance``
    Energy balancing. Start from the node whose SOC is closest to the lossy
    balance level and pair it with the in-contact node closest to that level
    on the other side of it.
``pba-wna``
    Aging mitigation that prioritizes availability: the emptiest node below
    ``e_min`` is paired with the fullest in-contact node above ``e_max``.
``pba-wona``
    Aging mitigation without that priority: the unhealthy node nearest to its
    violated threshold is paired with an in-contact node from the opposite
    unhealthy zone, by default also the one nearest to its threshold.

Every strategy moves half the SOC gap from the fuller to the emptier node,
capped by what the contact duration allows at the charging rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Collection, Iterable, Mapping, Optional, Sequence

from .mobility import Contact, neighbor_map
from .model import EPS, ChargingSession, DomainError, NodeState, RoundState, transfer_energy

PROTOCOLS = ("balance", "pba-wna", "pba-wona")

Pair = tuple[int, int]
Neighbors = Optional[Mapping[int, Collection[int]]]


@dataclass(frozen=True)
class BalanceTarget:
    e_star: float

    @property
    def e_star_scaled(self) -> float:
        return 100 * self.e_star


@dataclass(frozen=True)
class ExchangeDirective:
    giver_id: int
    receiver_id: int
    amount: float
    contact: Contact | None = None

    def __post_init__(self):
        if self.giver_id == self.receiver_id:
            raise DomainError("giver and receiver must differ")
        if self.amount <= 0:
            raise DomainError(f"amount must be positive, got {self.amount}")


@dataclass
class RoundOutcome:
    directives: list[ExchangeDirective]
    population: list[NodeState]
    sessions: list[ChargingSession]


def estimate_balance_target(beta: float) -> BalanceTarget:
    """Normalized SOC that a lossy population settles at when balanced."""
    if not 0 <= beta < 1:
        raise DomainError(f"beta={beta} outside [0, 1)")
    if beta < 1e-4:
        # Series expansion; the closed form cancels catastrophically near zero.
        return BalanceTarget(0.5 - beta / 8 - beta * beta / 16)
    keep = 1 - beta
    return BalanceTarget((math.sqrt(keep) - keep) / beta)


def _argmin(scores: Iterable[tuple[int, float]]) -> int | None:
    """Lowest id among those within EPS of the minimum score."""
    scores = list(scores)
    if not scores:
        return None
    low = min(v for _, v in scores)
    return min(i for i, v in scores if v <= low + EPS)


def _peers(ui: int, pool: Mapping[int, float], contacts: Neighbors) -> Iterable[int]:
    if contacts is None:
        return (j for j in pool if j != ui)
    return (j for j in contacts.get(ui, ()) if j != ui and j in pool)


def _initiator_balance(pool, target: BalanceTarget):
    t = target.e_star_scaled
    return _argmin((i, abs(t - s)) for i, s in pool.items())


def _peer_balance(ui, pool, contacts, target: BalanceTarget):
    t = target.e_star_scaled
    if pool[ui] > t + EPS:
        return _argmin((j, t - pool[j]) for j in _peers(ui, pool, contacts) if pool[j] < t - EPS)
    return _argmin((j, pool[j] - t) for j in _peers(ui, pool, contacts) if pool[j] > t + EPS)


def _initiator_wna(pool, e_min, e_max):
    return _argmin((i, s) for i, s in pool.items() if s < e_min - EPS)


def _peer_wna(ui, pool, contacts, e_min, e_max):
    return _argmin((j, -pool[j]) for j in _peers(ui, pool, contacts) if pool[j] > e_max + EPS)


def _threshold_distance(soc, e_min, e_max):
    if soc < e_min - EPS:
        return e_min - soc
    if soc > e_max + EPS:
        return soc - e_max
    return None


def _initiator_wona(pool, e_min, e_max):
    scored = ((i, _threshold_distance(s, e_min, e_max)) for i, s in pool.items())
    return _argmin((i, d) for i, d in scored if d is not None)


def _peer_wona(ui, pool, contacts, e_min, e_max, peer_rule="closest"):
    sign = 1.0 if peer_rule == "closest" else -1.0
    if pool[ui] < e_min - EPS:
        opposite = ((j, pool[j] - e_max) for j in _peers(ui, pool, contacts) if pool[j] > e_max + EPS)
    else:
        opposite = ((j, e_min - pool[j]) for j in _peers(ui, pool, contacts) if pool[j] < e_min - EPS)
    return _argmin((j, sign * d) for j, d in opposite)


def _compose(initiator, peer, pool, contacts) -> Pair | None:
    ui = initiator(pool)
    if ui is None:
        return None
    uj = peer(ui, pool, contacts)
    return None if uj is None else (ui, uj)


def select_pair_balancing(candidates: Mapping[int, float], contacts: Neighbors,
                          target: BalanceTarget) -> Pair | None:
    """Pick ``(u_i, u_j)`` for energy balancing.

    ``candidates`` maps node id to SOC for the nodes still eligible;
    ``contacts`` maps node id to the ids it is in valid contact with (``None``
    means everyone meets everyone). Returns ``None`` when the node closest to
    the target has nobody on the other side of it to pair with.
    """
    return _compose(lambda p: _initiator_balance(p, target),
                    lambda ui, p, c: _peer_balance(ui, p, c, target),
                    candidates, contacts)


def select_pair_wna(candidates: Mapping[int, float], contacts: Neighbors,
                    e_min: float, e_max: float) -> Pair | None:
    return _compose(lambda p: _initiator_wna(p, e_min, e_max),
                    lambda ui, p, c: _peer_wna(ui, p, c, e_min, e_max),
                    candidates, contacts)


def select_pair_wona(candidates: Mapping[int, float], contacts: Neighbors,
                     e_min: float, e_max: float, peer_rule: str = "closest") -> Pair | None:
    if peer_rule not in ("closest", "farthest"):
        raise DomainError(f"unknown peer rule {peer_rule!r}")
    return _compose(lambda p: _initiator_wona(p, e_min, e_max),
                    lambda ui, p, c: _peer_wona(ui, p, c, e_min, e_max, peer_rule),
                    candidates, contacts)


def half_gap_exchange(node_i: NodeState, node_j: NodeState, beta: float, alpha: float | None = None,
                      contact_duration: float | None = None, contact: Contact | None = None):
    """Move half the SOC gap from the fuller node to the emptier one.

    The amount is capped at ``alpha * contact_duration`` when both are given.
    Returns ``(directive, new_i, new_j)``, or ``None`` when there is no gap.
    """
    gap = abs(node_i.soc - node_j.soc)
    if gap <= EPS:
        return None
    amount = gap / 2
    if alpha is not None and contact_duration is not None:
        amount = min(amount, alpha * contact_duration)
    if amount <= EPS:
        return None
    giver, receiver = (node_i, node_j) if node_i.soc > node_j.soc else (node_j, node_i)
    g_soc, r_soc = transfer_energy(giver.soc, receiver.soc, amount, beta)
    giver = replace(giver, soc=g_soc, sent_total=giver.sent_total + amount)
    receiver = replace(receiver, soc=r_soc, received_total=receiver.received_total + amount)
    directive = ExchangeDirective(giver.id, receiver.id, amount, contact)
    if giver.id == node_i.id:
        return directive, giver, receiver
    return directive, receiver, giver


def _strategy(protocol: str, config) -> tuple[Callable, Callable, Callable[[NodeState, bool], bool]]:
    """(initiator, peer, is_complete) for a protocol id.

    ``is_complete(node, received)`` is the completion rule applied to each
    endpoint right after its exchange.
    """
    e_min, e_max = config.e_min, config.e_max
    if protocol == "balance":
        target = estimate_balance_target(config.beta)

        def done(n, received):
            return abs(n.soc - target.e_star_scaled) <= config.balance_tolerance + EPS

        return (lambda p: _initiator_balance(p, target),
                lambda ui, p, c: _peer_balance(ui, p, c, target), done)
    if protocol == "pba-wna":
        def done(n, received):
            return n.soc > e_min + EPS if received else n.soc < e_max - EPS

        return (lambda p: _initiator_wna(p, e_min, e_max),
                lambda ui, p, c: _peer_wna(ui, p, c, e_min, e_max), done)
    if protocol == "pba-wona":
        def done(n, received):
            return e_min + EPS < n.soc < e_max - EPS

        return (lambda p: _initiator_wona(p, e_min, e_max),
                lambda ui, p, c: _peer_wona(ui, p, c, e_min, e_max, config.alg2_peer_rule), done)
    raise DomainError(f"unknown protocol {protocol!r}; expected one of {PROTOCOLS}")


def run_protocol_round(protocol: str, population: Sequence[NodeState], contacts: Iterable[Contact],
                       config) -> RoundOutcome:
    """Greedily pair eligible nodes over this iteration's contacts.

    Only ``Incomplete`` nodes are eligible and each node takes part in at most
    one exchange per round. An initiator without a suitable peer is dropped and
    the next one is tried, until no initiator remains. Every node gets exactly
    one session: participants a charge/discharge session, everyone else an
    idle session of ``config.usage_drain`` percent (capped at its SOC).

    For ``balance``, a node's state is refreshed at the start of the round
    (``Complete`` iff within tolerance of the target) so nodes that drifted
    away become eligible again. The mitigation protocols keep ``Complete``
    for good, as their state is initialized once per run.
    """
    initiator, peer, done = _strategy(protocol, config)
    nodes = {n.id: n for n in population}
    if protocol == "balance":
        target = estimate_balance_target(config.beta).e_star_scaled
        for i, n in nodes.items():
            balanced = abs(n.soc - target) <= config.balance_tolerance + EPS
            nodes[i] = replace(n, round_state=RoundState.COMPLETE if balanced else RoundState.INCOMPLETE)
    nbrs = neighbor_map(contacts)
    pool = {i: n.soc for i, n in nodes.items() if n.round_state is RoundState.INCOMPLETE}
    directives: list[ExchangeDirective] = []
    sessions: dict[int, ChargingSession] = {}

    while True:
        ui = initiator(pool)
        if ui is None:
            break
        uj = peer(ui, pool, nbrs)
        if uj is None:
            del pool[ui]
            continue
        del pool[ui], pool[uj]
        contact = nbrs[ui][uj]
        res = half_gap_exchange(nodes[ui], nodes[uj], config.beta, config.alpha, contact.duration, contact)
        if res is None:
            continue
        d, ni, nj = res
        for old, new in ((nodes[ui], ni), (nodes[uj], nj)):
            received = new.id == d.receiver_id
            if done(new, received):
                new = replace(new, round_state=RoundState.COMPLETE)
            nodes[new.id] = new
            sessions[new.id] = ChargingSession(
                new.id,
                delta_charge=(1 - config.beta) * d.amount if received else 0.0,
                delta_discharge=0.0 if received else d.amount,
                participated=True,
                soc_at_start=old.soc,
            )
        directives.append(d)

    out_sessions = []
    for i, n in sorted(nodes.items()):
        s = sessions.get(i)
        if s is None:
            s = ChargingSession(i, delta_idle=min(config.usage_drain, n.soc), soc_at_start=n.soc)
        out_sessions.append(s)
    return RoundOutcome(directives, [nodes[n.id] for n in population], out_sessions)
