"""Random-waypoint style movement over discrete locations and contact detection.

Time advances in whole minutes. A node stays at a location for a uniformly
drawn number of minutes, then re-draws its location. Two nodes are in contact
while they share a location; a contact is valid once it lasts ``t_min``
minutes or more.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


@dataclass(frozen=True)
class LocationAssignment:
    node_id: int
    location: int
    stay_until: int
    arrival: int = 0


@dataclass(frozen=True, order=True)
class Contact:
    node_a: int
    node_b: int
    start_minute: int
    end_minute: int
    location: int

    @property
    def duration(self) -> int:
        return self.end_minute - self.start_minute


def _draw(rng: np.random.Generator, node_id: int, now: int, current: int | None, num_locations: int,
          stay_min: int, stay_max: int, exclude_current_location: bool) -> LocationAssignment:
    # Draw order per node: location first, then stay length.
    if exclude_current_location and current is not None and num_locations > 1:
        loc = int(rng.integers(num_locations - 1))
        if loc >= current:
            loc += 1
    else:
        loc = int(rng.integers(num_locations))
    stay = int(rng.integers(stay_min, stay_max, endpoint=True))
    return LocationAssignment(node_id, loc, now + stay, now)


def initial_assignments(m: int, rng: np.random.Generator, num_locations: int, stay_min: int, stay_max: int,
                        now: int = 0) -> list[LocationAssignment]:
    return [_draw(rng, i, now, None, num_locations, stay_min, stay_max, False) for i in range(m)]


def step_mobility(assignments: Sequence[LocationAssignment], now: int, rng: np.random.Generator, *,
                  num_locations: int, stay_min: int, stay_max: int,
                  exclude_current_location: bool = False) -> list[LocationAssignment]:
    """Relocate every node whose stay has expired by ``now``, in node-index order."""
    out = []
    for a in assignments:
        if a.stay_until <= now:
            a = _draw(rng, a.node_id, now, a.location, num_locations, stay_min, stay_max,
                      exclude_current_location)
        out.append(a)
    return out


def detect_contacts(track: np.ndarray, start_minute: int, t_min: int) -> list[Contact]:
    """Find every maximal co-location interval of length ``>= t_min``.

    ``track[k, i]`` is the location of node ``i`` during minute
    ``start_minute + k``; the window is ``[start_minute, start_minute + len(track))``.
    Intervals are clipped to the window. Output is sorted by (a, b, start).
    """
    track = np.asarray(track)
    steps, m = track.shape
    if m < 2 or steps == 0:
        return []
    a_idx, b_idx = np.triu_indices(m, k=1)
    same = track[:, a_idx] == track[:, b_idx]
    padded = np.zeros((steps + 2, same.shape[1]), dtype=np.int8)
    padded[1:-1] = same
    edges = np.diff(padded, axis=0)
    # Column-major nonzero keeps each pair's edges together and in time order.
    s_pair, s_time = np.nonzero(edges.T == 1)
    e_pair, e_time = np.nonzero(edges.T == -1)
    keep = (e_time - s_time) >= t_min
    p, s, e = s_pair[keep], s_time[keep], e_time[keep]
    a, b = a_idx[p], b_idx[p]
    cols = (a.tolist(), b.tolist(), (s + start_minute).tolist(), (e + start_minute).tolist(),
            track[s, a].tolist())
    return [Contact(*row) for row in zip(*cols)]


def neighbor_map(contacts: Iterable[Contact]) -> dict[int, dict[int, Contact]]:
    """Longest contact per pair, keyed both ways; earliest wins on equal length."""
    best: dict[tuple[int, int], Contact] = {}
    for c in contacts:
        key = (c.node_a, c.node_b)
        cur = best.get(key)
        if cur is None or c.duration > cur.duration or (c.duration == cur.duration and c.start_minute < cur.start_minute):
            best[key] = c
    out: dict[int, dict[int, Contact]] = {}
    for (a, b), c in best.items():
        out.setdefault(a, {})[b] = c
        out.setdefault(b, {})[a] = c
    return out


def write_contacts(path: str | Path, contacts: Iterable[Contact]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["a", "b", "start", "end", "location"])
        for c in contacts:
            w.writerow([c.node_a, c.node_b, c.start_minute, c.end_minute, c.location])
