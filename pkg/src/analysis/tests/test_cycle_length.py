import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase

from engine.simulator import run
from scenario.parser import parse_config
from scheduling.timetable import build_timetable, compute_cycle_length
from topology.builder import build_topology

from ..pcap import read_pcap
from ..timeseries import bin_timeseries

BIN_100MS = 100_000_000
CONFIG_COUNT = 20

SCENARIO = """
name: CYCLE{index}
seed: {index}
duration: {duration}
central_network: {{node_count: 1}}
autonomous_systems:
  - id: AS0
    client_count: 1
    roles: {{0: attacker}}
  - id: AS1
    server_count: {target_count}
    roles: {{{roles}}}
capture: {{include_as_links: true}}
vectors:
{vectors}
targets: [{targets}]
"""

VECTOR = """  - id: V{index}
    protocol: UDP
    size: 250
    rate: {rate}
    burst: {burst}
    switch: {switch}
    dst_port: {port}"""


def random_scenario(index: int, rng: np.random.Generator) -> str:
    """
    Two or three vectors over two or three targets. Bursts and switch times
    are whole bins and vector rates are distinct, so a target link repeats
    only once per cycle. The run lasts three cycles.
    """
    target_count = int(rng.integers(2, 4))
    vector_count = int(rng.integers(2, 4))
    rates = rng.choice([200_000, 500_000, 800_000], size=vector_count, replace=False)
    vectors, cycle_bins = [], 0
    for v in range(vector_count):
        burst = int(rng.integers(2, 6))
        switch = int(rng.integers(0, 3))
        cycle_bins += target_count * burst + (target_count - 1) * switch
        vectors.append(VECTOR.format(
            index=v + 1, rate=int(rates[v]), burst=burst / 10, switch=switch / 10, port=5001 + v,
        ))
    targets = [f"AS1-S{k}" for k in range(target_count)]
    return SCENARIO.format(
        index=index,
        duration=3 * cycle_bins / 10,
        target_count=target_count,
        roles=', '.join(f"{k}: target" for k in range(target_count)),
        vectors='\n'.join(vectors),
        targets=', '.join(targets),
    )


def onsets(packets: np.ndarray) -> list[int]:
    """Bins where traffic resumes after an empty bin (or starts the series)."""
    return [k for k in range(len(packets)) if packets[k] > 0 and (k == 0 or packets[k - 1] == 0)]


def autocorrelation_period(values: np.ndarray, max_lag: int) -> int:
    """Lag in 1..max_lag with the highest correlation between the series and its shifted copy."""
    scores = [np.corrcoef(values[:-lag], values[lag:])[0, 1] for lag in range(1, max_lag + 1)]
    return int(np.argmax(scores)) + 1


class CycleLengthTests(SimpleTestCase):
    """Pulse onsets and period measured on the captures of randomized schedules."""

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        rng = np.random.default_rng(20240611)
        cls.runs = []
        for index in range(CONFIG_COUNT):
            cfg = parse_config(random_scenario(index, rng))
            with tempfile.TemporaryDirectory() as out:
                report = run(cfg, Path(out))
                records = {name: read_pcap(Path(out) / name) for name in report.capture_counters}
            cls.runs.append((cfg, build_topology(cfg), records))

    @staticmethod
    def _capture(records, direction):
        return next(rows for name, rows in records.items() if f"__{direction}__" in name)

    def test_pulse_onsets_follow_timetable(self):
        for cfg, topo, records in self.runs:
            timetable = build_timetable(cfg.vectors, cfg.targets, cfg.duration)
            bins = timetable.duration // BIN_100MS
            downlink = self._capture(records, 'CN0-to-AS1-GW')
            series = bin_timeseries(downlink, BIN_100MS, lambda r: f"{r.dst_port} {r.dst}")
            for vector in cfg.vectors:
                for target in cfg.targets:
                    group = f"{vector.dst_port} {topo.host_address(topo.node_id(target))}"
                    packets = (
                        series.frame[series.frame['group'] == group]
                        .set_index('bin')['packets']
                        .reindex(range(bins), fill_value=0)
                        .to_numpy()
                    )
                    expected = [
                        w.start // BIN_100MS for w in timetable.iter_windows(vector.id) if w.target == target
                    ]
                    measured = onsets(packets)
                    with self.subTest(scenario=cfg.name, vector=vector.id, target=target):
                        self.assertEqual(len(measured), len(expected))
                        for seen, scheduled in zip(measured, expected):
                            self.assertLessEqual(abs(seen - scheduled), 1)

    def test_period_equals_cycle_length(self):
        for cfg, _, records in self.runs:
            cycle_bins = round(compute_cycle_length(cfg.vectors, len(cfg.targets)) * 10)
            bins = round(cfg.duration * 10)
            series = bin_timeseries(self._capture(records, 'AS1-GW-to-AS1-S0'), BIN_100MS)
            values = series.totals()['bytes'].reindex(range(bins), fill_value=0).to_numpy(dtype=float)
            period = autocorrelation_period(values, cycle_bins * 3 // 2)
            with self.subTest(scenario=cfg.name):
                self.assertLessEqual(abs(period - cycle_bins), 1)

