"""Independent brute-force re-implementations used as test oracles.

Nothing in here imports the package's computational code, only its value
types where a test needs to construct inputs.
"""

import itertools
import math


def aging_scalar(start_cycles, sessions, p_r, c_max):
    """Replay sessions with plain floats.

    ``sessions`` is a list of ``(kind, delta, soc)`` with kind in
    ``{"c", "d", "idle"}``. Returns ``(degradation, cycles, charge, discharge)``.
    """
    quantum = p_r / c_max
    degradation = start_cycles * quantum
    cycles = start_cycles
    ch = dis = 0.0
    for kind, delta, soc in sessions:
        if kind == "idle":
            degradation += delta * abs(1 - soc / 50) * quantum / 200
            dis += delta
        else:
            degradation += delta * (1 + cycles) * quantum / (200 * c_max)
            if kind == "c":
                ch += delta
            else:
                dis += delta
        if ch >= 100 - 1e-9 and dis >= 100 - 1e-9:
            cycles = min(cycles + 1, c_max)
            ch, dis = max(ch - 100, 0.0), max(dis - 100, 0.0)
        ch, dis = min(ch, 100.0), min(dis, 100.0)
    return min(degradation, max(p_r, start_cycles * quantum)), cycles, ch, dis


def colocated_runs(track, a, b, t_min, start=0):
    """Minute-by-minute scan for maximal co-location runs of one pair."""
    runs = []
    run_start = None
    for k in range(len(track) + 1):
        same = k < len(track) and track[k][a] == track[k][b]
        if same and run_start is None:
            run_start = k
        elif not same and run_start is not None:
            if k - run_start >= t_min:
                runs.append((start + run_start, start + k, track[run_start][a]))
            run_start = None
    return runs


def brute_contacts(track, t_min, start=0):
    m = len(track[0])
    out = []
    for a, b in itertools.combinations(range(m), 2):
        for s, e, loc in colocated_runs(track, a, b, t_min, start):
            out.append((a, b, s, e, loc))
    return out


# Pair selection: for each protocol, a score for the initiator and one for the
# peer (lower is better) plus zone predicates. The oracle enumerates all
# ordered pairs and sorts by (initiator score, i, peer score, j).

def _within(x, y):
    return abs(x - y) <= 1e-9


def wna_rules(e_min, e_max):
    def init(s):
        return s if s < e_min - 1e-9 else None

    def peer(si, sj):
        return -sj if sj > e_max + 1e-9 else None

    return init, peer


def wona_rules(e_min, e_max, farthest=False):
    def dist(s):
        if s < e_min - 1e-9:
            return e_min - s
        if s > e_max + 1e-9:
            return s - e_max
        return None

    def peer(si, sj):
        low_i = si < e_min - 1e-9
        if low_i and sj > e_max + 1e-9:
            d = sj - e_max
        elif not low_i and sj < e_min - 1e-9:
            d = e_min - sj
        else:
            return None
        return -d if farthest else d

    return dist, peer


def balance_rules(target):
    def init(s):
        return abs(target - s)

    def peer(si, sj):
        if si > target + 1e-9:
            return target - sj if sj < target - 1e-9 else None
        return sj - target if sj > target + 1e-9 else None

    return init, peer


def _ranked(values, score):
    return sorted((score(v), i) for i, v in values.items() if score(v) is not None)


def brute_select(socs, adjacency, rules):
    """Exhaustive oracle: the best initiator must pair, else None.

    ``socs`` maps id -> SOC, ``adjacency`` is a set of frozenset pairs (or
    None for a complete graph).
    """
    init, peer = rules
    ranked = _ranked(socs, init)
    if not ranked:
        return None
    # Lowest id among ties with the best score.
    best = min(i for sc, i in ranked if sc <= ranked[0][0] + 1e-9)
    options = []
    for i, j in itertools.permutations(socs, 2):
        if i != best:
            continue
        if adjacency is not None and frozenset((i, j)) not in adjacency:
            continue
        ps = peer(socs[i], socs[j])
        if ps is not None:
            options.append((ps, j))
    if not options:
        return None
    top = min(ps for ps, _ in options)
    return best, min(j for ps, j in options if ps <= top + 1e-9)


def brute_round(socs, adjacency, rules, beta, cap=math.inf):
    """Round oracle: repeatedly take the lexicographically best feasible pair.

    Equivalent to dropping initiators that have no peer. Returns list of
    (giver, receiver, amount) and the final SOCs. Completion rules are not
    applied; callers use it on instances where every pair completes.
    """
    init, peer = rules
    socs = dict(socs)
    pool = set(socs)
    out = []
    while True:
        best = None
        for i, j in itertools.permutations(sorted(pool), 2):
            if adjacency is not None and frozenset((i, j)) not in adjacency:
                continue
            si = init(socs[i])
            pj = peer(socs[i], socs[j]) if si is not None else None
            if pj is None:
                continue
            key = (round(si, 9), i, round(pj, 9), j)
            if best is None or key < best:
                best = key
        if best is None:
            return out, socs
        i, j = best[1], best[3]
        pool -= {i, j}
        hi, lo = (i, j) if socs[i] > socs[j] else (j, i)
        amount = min((socs[hi] - socs[lo]) / 2, cap)
        socs[hi] -= amount
        socs[lo] += (1 - beta) * amount
        out.append((hi, lo, amount))
