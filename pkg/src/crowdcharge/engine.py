"""Seeded run loop and the multi-run batch harness.

Randomness comes from one ``numpy.random.Generator`` over PCG64 per run,
seeded with the run seed, and is consumed in this order:

1. initial SOC of every node (``uniform`` over ``initial_soc_range``),
2. initial completed cycles of every node (integers over ``cycles_range``,
   inclusive),
3. initial location then stay length, node by node,
4. during the run, for each minute, location then stay length for every
   node whose stay expired, in node-index order.

Protocols never touch the generator, so every protocol sees the same
population and the same movement for a given seed.
"""

from __future__ import annotations

import csv
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .config import SimConfig
from .metrics import MetricsRow, snapshot, write_rows
from .mobility import Contact, detect_contacts, initial_assignments, step_mobility, write_contacts
from .model import AgingParams, ChargingSession, NodeState, apply_session, new_node
from .protocols import PROTOCOLS, ExchangeDirective, run_protocol_round

log = logging.getLogger(__name__)

METRIC_NAMES = tuple(f.name for f in fields(MetricsRow) if f.name != "iteration")
HEADLINE_ITERATIONS = 3


@dataclass
class RunResult:
    seed: int
    protocol: str
    rows: list[MetricsRow]
    population: list[NodeState]
    contacts: list[Contact] = field(default_factory=list)
    directives: list[list[ExchangeDirective]] = field(default_factory=list)
    sessions: list[list[ChargingSession]] = field(default_factory=list)


def apply_sessions(population: Sequence[NodeState], sessions: Sequence[ChargingSession],
                   params: AgingParams) -> list[NodeState]:
    """Drain idle usage from SOC, then age every battery by its session."""
    by_id = {s.node_id: s for s in sessions}
    out = []
    for n in population:
        s = by_id[n.id]
        if not s.participated and s.delta_idle > 0:
            n = replace(n, soc=n.soc - s.delta_idle, drained_total=n.drained_total + s.delta_idle)
        out.append(apply_session(n, s, params))
    return out


def run_simulation(config: SimConfig, seed: int | None = None, *, protocol: str | None = None,
                   initial_socs: Sequence[float] | None = None, record: bool = False) -> RunResult:
    """Run one seeded simulation of ``config.iterations`` iterations.

    ``initial_socs`` overrides the drawn SOCs (the draws still happen, so the
    rest of the random stream is unchanged). With ``record`` the contact
    trace, directives and sessions of every iteration are kept on the result.
    """
    config.validate()
    seed = config.seed if seed is None else seed
    protocol = protocol or config.protocol
    if protocol not in PROTOCOLS:
        raise ValueError(f"unknown protocol {protocol!r}")
    params = AgingParams(config.p_r, config.c_max)
    rng = np.random.default_rng(seed)
    m = config.m

    socs = rng.uniform(*config.initial_soc_range, size=m)
    cycles = rng.integers(*config.cycles_range, endpoint=True, size=m)
    if initial_socs is not None:
        if len(initial_socs) != m:
            raise ValueError(f"initial_socs has {len(initial_socs)} entries for m={m}")
        socs = np.asarray(initial_socs, dtype=float)
    mob = dict(num_locations=config.num_locations, stay_min=config.stay_min, stay_max=config.stay_max)
    assignments = initial_assignments(m, rng, **mob)
    population = [new_node(i, float(socs[i]), int(cycles[i]), params, assignments[i].location) for i in range(m)]

    result = RunResult(seed, protocol, [], population)
    minute = 0
    row = None
    for it in range(1, config.iterations + 1):
        start = minute
        track = np.empty((config.iteration_minutes, m), dtype=np.int64)
        for k in range(config.iteration_minutes):
            assignments = step_mobility(assignments, minute, rng,
                                        exclude_current_location=config.exclude_current_location, **mob)
            track[k] = [a.location for a in assignments]
            minute += 1
        contacts = detect_contacts(track, start, config.t_min)
        outcome = run_protocol_round(protocol, population, contacts, config)
        population = apply_sessions(outcome.population, outcome.sessions, params)
        population = [replace(n, location=a.location) for n, a in zip(population, assignments)]
        row = snapshot(population, outcome.directives, contacts, config, it, row)
        result.rows.append(row)
        if record:
            result.contacts.extend(contacts)
            result.directives.append(outcome.directives)
            result.sessions.append(outcome.sessions)
    result.population = population
    return result


@dataclass
class ProtocolSummary:
    protocol: str
    seeds: list[int]
    mean: np.ndarray  # iterations x metrics
    std: np.ndarray
    headline: float  # mean cumulative capacity_reduction at HEADLINE_ITERATIONS
    headline_std: float


@dataclass
class BatchSummary:
    protocols: dict[str, ProtocolSummary]
    runs: dict[str, list[RunResult]]

    def reduction_vs(self, proposed: str, benchmark: str = "balance") -> float:
        """Relative saving ``1 - proposed / benchmark`` of early capacity reduction."""
        return 1 - self.protocols[proposed].headline / self.protocols[benchmark].headline


def _rows_matrix(rows: Sequence[MetricsRow]) -> np.ndarray:
    return np.array([[getattr(r, k) for k in METRIC_NAMES] for r in rows], dtype=float).reshape(len(rows), len(METRIC_NAMES))


def summarize(protocol: str, results: Sequence[RunResult]) -> ProtocolSummary:
    stack = np.stack([_rows_matrix(r.rows) for r in results])
    col = METRIC_NAMES.index("capacity_reduction")
    n_it = stack.shape[1]
    if n_it:
        early = stack[:, min(HEADLINE_ITERATIONS, n_it) - 1, col]
    else:
        early = np.zeros(len(results))
    return ProtocolSummary(protocol, [r.seed for r in results], stack.mean(axis=0), stack.std(axis=0),
                           float(early.mean()), float(early.std()))


def _run_one(args):
    config, seed, protocol, record = args
    return run_simulation(config, seed, protocol=protocol, record=record)


def write_summary(path: str | Path, summary: ProtocolSummary) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["iteration"] + [f"{k}_{s}" for k in METRIC_NAMES for s in ("mean", "std")])
        for i in range(summary.mean.shape[0]):
            vals = []
            for j in range(len(METRIC_NAMES)):
                vals += [float(summary.mean[i, j]), float(summary.std[i, j])]
            w.writerow([i + 1] + vals)


def write_comparison(path: str | Path, batch: BatchSummary) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["protocol", "capacity_reduction_1_3_mean", "capacity_reduction_1_3_std", "reduction_vs_balance"])
        for name, s in batch.protocols.items():
            ratio = batch.reduction_vs(name) if "balance" in batch.protocols and name != "balance" else ""
            w.writerow([name, s.headline, s.headline_std, ratio])


def run_batch(config: SimConfig, protocols: Iterable[str] | None = None, out_dir: str | Path | None = None,
              *, emit_contacts: bool = False, summary: bool = True, workers: int = 1) -> BatchSummary:
    """Run seeds ``seed .. seed + runs - 1`` for each protocol and aggregate.

    With ``out_dir`` set, writes ``run_<seed>.csv`` (and ``contacts_<seed>.csv``
    with ``emit_contacts``) plus ``summary.csv`` per protocol. A single
    protocol writes straight into ``out_dir``; several protocols get one
    subdirectory each and a top-level ``comparison.csv``.
    """
    config.validate()
    protocols = list(protocols or [config.protocol])
    seeds = list(range(config.seed, config.seed + config.runs))
    out = Path(out_dir) if out_dir is not None else None
    if out is not None:
        try:
            out.mkdir(parents=True, exist_ok=True)
            for p in protocols if len(protocols) > 1 else []:
                (out / p).mkdir(exist_ok=True)
        except OSError as exc:
            raise OSError(f"cannot create output directory {out}: {exc.strerror}") from None

    jobs = [(config, s, p, emit_contacts) for p in protocols for s in seeds]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_run_one, jobs))
    else:
        results = [_run_one(j) for j in jobs]

    batch = BatchSummary({}, {})
    for p in protocols:
        runs = [r for r in results if r.protocol == p]
        batch.runs[p] = runs
        batch.protocols[p] = summarize(p, runs)
        log.info("%s: capacity reduction over iterations 1-%d = %.6f", p, HEADLINE_ITERATIONS,
                 batch.protocols[p].headline)

    if out is not None:
        try:
            for p in protocols:
                d = out / p if len(protocols) > 1 else out
                for r in batch.runs[p]:
                    write_rows(d / f"run_{r.seed}.csv", r.rows)
                    if emit_contacts:
                        write_contacts(d / f"contacts_{r.seed}.csv", r.contacts)
                if summary:
                    write_summary(d / "summary.csv", batch.protocols[p])
            if summary and len(protocols) > 1:
                write_comparison(out / "comparison.csv", batch)
        except OSError as exc:
            raise OSError(f"cannot write outputs under {out}: {exc}") from None
    return batch
