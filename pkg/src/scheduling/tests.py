from django.test import SimpleTestCase

from core.units import NS_PER_SECOND as S
from scenario.models import AttackVector, Protocol, SizeDistribution
from scenario.parser import load_config, resolve_preset

from .formatting import format_table
from .timetable import build_timetable, compute_cycle_length


def vector(vector_id, burst, switch=0.0, offset=None):
    return AttackVector(
        id=vector_id, protocol=Protocol.UDP, size_dist=SizeDistribution.fixed(96),
        rate=1e6, burst=burst, switch=switch, offset=offset,
    )


class CycleLengthTests(SimpleTestCase):
    def test_single_target_has_no_switch_terms(self):
        self.assertEqual(compute_cycle_length([vector('V1', 5, 3)], 1), 5)

    def test_three_by_three(self):
        vectors = [vector(f"V{i}", 5, 2) for i in range(3)]

        self.assertEqual(compute_cycle_length(vectors, 3), 57)

    def test_mixed_burst_and_switch(self):
        vectors = [vector('V1', 2, 1), vector('V2', 4, 0), vector('V3', 3, 2)]

        self.assertEqual(compute_cycle_length(vectors, 2), 21)

    def test_var2_preset(self):
        cfg = load_config(resolve_preset('var2'))

        self.assertEqual(compute_cycle_length(cfg.vectors, len(cfg.targets)), 33)


class TimetableTests(SimpleTestCase):
    targets = ('T0', 'T1', 'T2')

    def test_back_to_back_phases(self):
        tt = build_timetable([vector(f"V{i}", 5, 2) for i in range(3)], self.targets, 600)
        windows = tt.first_cycle()

        self.assertEqual(len(windows), 9)
        self.assertEqual([s.offset for s in tt.vectors], [0, 19 * S, 38 * S])
        self.assertEqual(tt.schedule_of('V1').offset, windows[2].end)
        self.assertEqual([w.target for w in windows[:3]], list(self.targets))

    def test_cycle_is_sum_of_windows_and_gaps(self):
        vectors = [vector('V1', 0.3, 0.1), vector('V2', 1.7, 0.45), vector('V3', 2.2, 0)]
        tt = build_timetable(vectors, self.targets, 100)
        covered = sum(s.span for s in tt.vectors)

        self.assertEqual(covered, tt.cycle_length)

    def test_zero_switch_windows_abut(self):
        tt = build_timetable([vector('V1', 4, 0)], ('T0', 'T1'), 16)
        windows = tt.windows()

        for before, after in zip(windows, windows[1:]):
            self.assertEqual(before.end, after.start)
        self.assertEqual([w.target for w in windows], ['T0', 'T1', 'T0', 'T1'])

    def test_truncated_at_duration(self):
        tt = build_timetable([vector('V1', 5, 2)], self.targets, 10)
        windows = tt.windows()

        # C = 19; windows at [0,5) and [7,10) truncated, the third starts at 14
        self.assertEqual([(w.start, w.end) for w in windows], [(0, 5 * S), (7 * S, 10 * S)])
        self.assertEqual(tt.on_time('V1'), 8 * S)

    def test_active_target_boundaries(self):
        tt = build_timetable([vector('V0', 1, 1), vector('V1', 5, 2)], self.targets, 600)
        o = tt.schedule_of('V1').offset
        b, s, c = 5 * S, 2 * S, tt.cycle_length

        self.assertEqual(tt.active_target('V1', o), 'T0')
        self.assertIsNone(tt.active_target('V1', o + b))
        self.assertEqual(tt.active_target('V1', o + b + s), 'T1')
        self.assertEqual(tt.active_target('V1', c + o + b + s), 'T1')
        self.assertIsNone(tt.active_target('V1', 0))
        self.assertIsNone(tt.active_target('V1', 600 * S))

    def test_periodicity(self):
        tt = build_timetable([vector('V1', 0.7, 0.2), vector('V2', 1.1, 0)], self.targets, 60)
        c = tt.cycle_length
        for t in range(0, 60 * S - c, 37_000_000):
            for vector_id in ('V1', 'V2'):
                self.assertEqual(tt.active_target(vector_id, t), tt.active_target(vector_id, t + c))

    def test_at_most_one_vector_on(self):
        tt = build_timetable([vector('V1', 0.7, 0.2), vector('V2', 1.1, 0), vector('V3', 0.4, 0.3)],
                             self.targets, 30)
        for t in range(0, 30 * S, 10_000_000):
            active = [v for v in ('V1', 'V2', 'V3') if tt.active_target(v, t) is not None]
            self.assertLessEqual(len(active), 1)
        self.assertFalse(tt.has_overlap())

    def test_retarget_events_per_cycle(self):
        vectors = [vector('V1', 1, 0.5), vector('V2', 2, 0)]
        tt = build_timetable(vectors, self.targets, 2 * compute_cycle_length(vectors, 3))
        events = [e for v in ('V1', 'V2') for e in tt.retarget_events(v)]

        self.assertEqual(len(events), 2 * 2 * 3)
        self.assertEqual(list(tt.retarget_events('V1'))[:2], [(0, 'T0'), (1_500_000_000, 'T1')])

    def test_explicit_offset_overlap(self):
        tt = build_timetable([vector('V1', 2), vector('V2', 2, offset=0.5)], ('T0',), 20)

        self.assertEqual(tt.schedule_of('V2').offset, 500_000_000)
        self.assertTrue(tt.has_overlap())

    def test_window_at(self):
        tt = build_timetable([vector('V1', 5, 2)], self.targets, 100)
        window = tt.window_at('V1', 19 * S + 8 * S)

        self.assertEqual((window.target, window.start, window.end, window.cycle), ('T1', 26 * S, 31 * S, 1))


class FormatTableTests(SimpleTestCase):
    def test_var1_table(self):
        cfg = load_config(resolve_preset('var1'))
        tt = build_timetable(cfg.vectors, cfg.targets, cfg.duration)
        lines = format_table(tt).splitlines()

        self.assertEqual(lines[0].split(), ['vector', 'target', 'on_start_s', 'on_end_s', 'retarget_s'])
        self.assertEqual(len(lines), 1 + 4 + 1)
        self.assertEqual(lines[2].split(), ['V2', 'AS2-S0', '5.000000', '10.000000', '5.000000'])
        self.assertEqual(lines[-1], 'cycle_length_s 20.000000')
