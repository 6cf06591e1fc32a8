import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from crowdcharge.config import SimConfig
from crowdcharge.engine import apply_sessions
from crowdcharge.metrics import (
    CSV_COLUMNS,
    MetricsRow,
    accumulate_loss,
    energy_distribution,
    ledger_residual,
    read_rows,
    snapshot,
    unhealthy_count,
    variation_distance,
    write_rows,
)
from crowdcharge.mobility import Contact
from crowdcharge.model import AgingParams, DomainError, new_node
from crowdcharge.protocols import ExchangeDirective, run_protocol_round

PARAMS = AgingParams(20, 500)


class TestDistribution:
    @pytest.mark.parametrize(
        "socs, expected", [([50, 50], [0.5, 0.5]), ([10, 30, 60], [0.1, 0.3, 0.6]), ([100], [1.0])]
    )
    def test_examples(self, socs, expected):
        assert energy_distribution(socs) == pytest.approx(expected, abs=1e-12)

    def test_empty_population(self):
        with pytest.raises(DomainError):
            energy_distribution([0, 0])

    @given(st.lists(st.floats(0, 100), min_size=1, max_size=50).filter(lambda xs: sum(xs) > 1e-6))
    def test_sums_to_one(self, socs):
        assert energy_distribution(socs).sum() == pytest.approx(1.0, abs=1e-9)


class TestVariationDistance:
    def test_identical(self):
        assert variation_distance([0.2, 0.8], [0.2, 0.8]) == 0

    def test_disjoint(self):
        assert variation_distance([1, 0], [0, 1]) == 2.0

    def test_example(self):
        assert variation_distance([0.5, 0.3, 0.2], [0.2, 0.3, 0.5]) == pytest.approx(0.6, abs=1e-12)

    def test_length_mismatch(self):
        with pytest.raises(DomainError):
            variation_distance([1.0], [0.5, 0.5])

    @given(st.lists(st.floats(0.1, 100), min_size=2, max_size=20), st.randoms(use_true_random=False))
    def test_relabeling_invariant(self, socs, rnd):
        m = len(socs)
        u = np.full(m, 1 / m)
        shuffled = list(socs)
        rnd.shuffle(shuffled)
        a = variation_distance(energy_distribution(socs), u)
        b = variation_distance(energy_distribution(shuffled), u)
        assert a == pytest.approx(b, abs=1e-12)
        assert 0 <= a <= 2


class TestUnhealthy:
    def test_examples(self):
        assert unhealthy_count([5, 50, 95], 20, 80) == 2
        assert unhealthy_count([50] * 10, 20, 80) == 0
        assert unhealthy_count([20, 80], 20, 80) == 0


class TestLoss:
    def test_examples(self):
        assert accumulate_loss([ExchangeDirective(1, 0, 10)], 0.2) == pytest.approx(2.0)
        assert accumulate_loss([], 0.2) == 0
        assert accumulate_loss([ExchangeDirective(1, 0, 45), ExchangeDirective(3, 2, 5)], 0.2) == pytest.approx(10.0)


def run_iteration(socs, cycles, protocol, config):
    pop = [new_node(i, s, c, PARAMS) for i, (s, c) in enumerate(zip(socs, cycles))]
    contacts = [Contact(a, b, 0, 600, 0) for a in range(len(socs)) for b in range(a + 1, len(socs))]
    out = run_protocol_round(protocol, pop, contacts, config)
    pop = apply_sessions(out.population, out.sessions, PARAMS)
    return pop, snapshot(pop, out.directives, contacts, config, 1)


class TestSnapshot:
    def test_two_node_trace(self):
        pop, row = run_iteration([5.0, 95.0], [0, 0], "pba-wna", SimConfig(alpha=1000))
        assert row.total_energy == pytest.approx(91)
        assert row.energy_loss == pytest.approx(9)
        assert row.unhealthy_count == 0
        assert row.meetings_used == 1 and row.meetings_available == 1

    def test_four_node_hand_trace(self):
        # socs [10, 30, 60, 90], cycles [0, 100, 200, 300], drain 2, uncapped:
        #   pair (0, 3): amount 40 -> node0 42, node3 50
        #   idle: node1 30 -> 28, node2 60 -> 58
        #   wcc node0: 32/200 * 1/500 * 0.04 = 0.0000128
        #   wcc node3: 40/200 * 301/500 * 0.04 = 0.004816
        #   nowcc node1: 2/200 * 0.4 * 0.04 = 0.00016
        #   nowcc node2: 2/200 * 0.2 * 0.04 = 0.00008
        #   total 178, mean 44.5, |dev| sum 38 -> D = 38/178
        pop, row = run_iteration([10.0, 30.0, 60.0, 90.0], [0, 100, 200, 300], "pba-wna",
                                 SimConfig(alpha=1000, usage_drain=2))
        assert [n.soc for n in pop] == pytest.approx([42, 28, 58, 50])
        assert row.total_energy == pytest.approx(178)
        assert row.variation_distance == pytest.approx(38 / 178, abs=1e-12)
        assert row.energy_loss == pytest.approx(8)
        assert row.capacity_reduction == pytest.approx(0.0000128 + 0.004816 + 0.00016 + 0.00008, abs=1e-12)
        assert row.unhealthy_count == 0
        assert row.balanced_count == 0
        assert row.meetings_used == 1 and row.meetings_available == 6
        for n in pop:
            assert abs(ledger_residual(n, 0.2)) < 1e-9

    def test_balanced_count_uses_tolerance(self):
        pop, row = run_iteration([46.5, 48.0, 10.0], [0, 0, 0], "pba-wna", SimConfig())
        assert row.balanced_count == 2

    def test_cumulative_loss(self):
        prev = MetricsRow(1, 0, 0, 0, 0, 0, 0, 0.0, 5.0)
        pop, _ = run_iteration([5.0, 95.0], [0, 0], "pba-wna", SimConfig(alpha=1000))
        row = snapshot(pop, [ExchangeDirective(1, 0, 10)], [], SimConfig(), 2, prev)
        assert row.energy_loss == pytest.approx(7.0)


def test_csv_round_trip(tmp_path):
    rows = [MetricsRow(1, 4900.5, 0.41, 17, 4876, 2, 28, 0.0198, 25.7), MetricsRow(2, 4890.0, 0.4, 0, 5000, 2, 20, 0.03, 26)]
    p = tmp_path / "r.csv"
    write_rows(p, rows)
    assert p.read_text().splitlines()[0] == ",".join(CSV_COLUMNS)
    assert CSV_COLUMNS == ("iteration", "total_energy", "variation_distance", "meetings_used", "meetings_available",
                           "balanced_count", "unhealthy_count", "capacity_reduction", "energy_loss")
    assert read_rows(p) == rows
