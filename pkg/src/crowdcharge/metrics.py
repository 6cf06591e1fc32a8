"""Per-iteration evaluation quantities."""

from __future__ import annotations

import csv
from dataclasses import astuple, dataclass, fields
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .model import EPS, DomainError, NodeState
from .protocols import ExchangeDirective, estimate_balance_target


@dataclass(frozen=True)
class MetricsRow:
    iteration: int
    total_energy: float
    variation_distance: float
    meetings_used: int
    meetings_available: int
    balanced_count: int
    unhealthy_count: int
    capacity_reduction: float
    energy_loss: float


CSV_COLUMNS = tuple(f.name for f in fields(MetricsRow))


def energy_distribution(socs: Sequence[float]) -> np.ndarray:
    socs = np.asarray(socs, dtype=float)
    total = socs.sum()
    if total <= 0:
        raise DomainError("energy distribution undefined for an empty population")
    return socs / total


def variation_distance(p: Sequence[float], q: Sequence[float]) -> float:
    """Sum of absolute differences (not halved), so the range is [0, 2]."""
    p, q = np.asarray(p, dtype=float), np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise DomainError(f"length mismatch: {p.shape} vs {q.shape}")
    return float(np.abs(p - q).sum())


def unhealthy_count(socs: Iterable[float], e_min: float, e_max: float) -> int:
    """Nodes strictly outside ``[e_min, e_max]``."""
    return sum(1 for s in socs if s < e_min - EPS or s > e_max + EPS)


def balanced_count(socs: Iterable[float], target_scaled: float, tolerance: float) -> int:
    return sum(1 for s in socs if abs(s - target_scaled) <= tolerance + EPS)


def accumulate_loss(directives: Iterable[ExchangeDirective], beta: float, total: float = 0.0) -> float:
    for d in directives:
        total += beta * d.amount
    return total


def ledger_residual(node: NodeState, beta: float) -> float:
    """How far a node's SOC is from what its transfer and usage ledgers imply."""
    expected = node.initial_soc - node.sent_total + (1 - beta) * node.received_total - node.drained_total
    return node.soc - expected


def capacity_reduction(population: Iterable[NodeState]) -> float:
    return sum(n.degradation - n.base_degradation for n in population)


def snapshot(population: Sequence[NodeState], directives: Sequence[ExchangeDirective], contacts: Sequence,
             config, iteration: int, previous: MetricsRow | None = None) -> MetricsRow:
    socs = [n.soc for n in population]
    m = len(socs)
    total = float(sum(socs))
    if total > 0:
        vd = variation_distance(energy_distribution(socs), np.full(m, 1.0 / m))
    else:
        # All batteries empty: the distribution is undefined, report the worst case.
        vd = 2.0
    target = estimate_balance_target(config.beta).e_star_scaled
    prior_loss = previous.energy_loss if previous is not None else 0.0
    return MetricsRow(
        iteration=iteration,
        total_energy=total,
        variation_distance=vd,
        meetings_used=len(directives),
        meetings_available=len(contacts),
        balanced_count=balanced_count(socs, target, config.balance_tolerance),
        unhealthy_count=unhealthy_count(socs, config.e_min, config.e_max),
        capacity_reduction=capacity_reduction(population),
        energy_loss=accumulate_loss(directives, config.beta, prior_loss),
    )


def write_rows(path: str | Path, rows: Iterable[MetricsRow]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in rows:
            w.writerow(astuple(r))


def read_rows(path: str | Path) -> list[MetricsRow]:
    types = [f.type for f in fields(MetricsRow)]
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != CSV_COLUMNS:
            raise ValueError(f"{path}: unexpected header {header}")
        return [MetricsRow(*(int(v) if t in ("int", int) else float(v) for v, t in zip(rec, types)))
                for rec in reader]
