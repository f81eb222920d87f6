from django.conf import settings
from django.test import SimpleTestCase

from .exceptions import ParseError, ValidationError
from .models import Protocol, Role, SizeDistribution
from .parser import load_config, parse_config, resolve_preset, serialize
from .validation import validate

MINIMAL = """
name: minimal
duration: 10
central_network:
  node_count: 2
autonomous_systems:
  - id: AS0
    client_count: 2
    server_count: 1
"""

MIXED_VECTOR = """
name: mixed
duration: 20s
central_network: {node_count: 3}
autonomous_systems:
  - id: AS0
    client_count: 1
    roles: {0: attacker}
  - id: AS1
    server_count: 1
    roles: {0: target}
vectors:
  - id: V4
    protocol: MIXED
    size_dist: {36: 0.49, 48: 0.18, 96: 0.06, 128: 0.10, 256: %s}
    rate: 5Mbps
    burst: 5s
targets: [AS1-S0]
"""

SINGLE_VECTOR = """
name: single
duration: 20
central_network: {node_count: 3, redundancy: 0.5}
autonomous_systems:
  - id: AS0
    client_count: 3
    roles: {0: attacker, 1: attacker, 2: %s}
  - id: AS1
    client_count: 1
    server_count: 2
    roles: {1: target}
vectors:
  - id: V1
    protocol: UDP
    size: 96
    rate: 5e6
    burst: 2
    switch: 1
    jitter: %s
targets: [%s]
"""

PRESETS = ['dist', 'var1', 'var2', 'sc1', 'sc2', 'sc3',
           'sc2_an', 'sc2_as', 'sc2_bn', 'sc2_cn', 'sc2_nt', 'sc2_pv']


class ParseConfigTests(SimpleTestCase):
    def test_minimal_document_fills_defaults(self):
        cfg = parse_config(MINIMAL)

        self.assertEqual(cfg.seed, 0)
        self.assertEqual(cfg.vectors, ())
        self.assertEqual(cfg.targets, ())
        self.assertEqual(cfg.central_network.link_rate, 1e9)
        self.assertEqual(cfg.central_network.link_delay, 0.001)
        self.assertEqual(cfg.central_network.queue_len, 100)
        self.assertEqual(cfg.autonomous_systems[0].link_rate, 1e8)
        self.assertEqual(cfg.autonomous_systems[0].link_delay, 0.0002)
        self.assertEqual(cfg.benign.request_size, 400)
        self.assertEqual(cfg.capture.prefix, 'minimal')
        self.assertEqual(cfg.capture.suffix, 'cap')
        self.assertEqual(cfg.hosts_with_role(Role.BENIGN), ['AS0-C0', 'AS0-C1'])
        self.assertEqual(cfg.server_pool(), ['AS0-S0'])

    def test_dist_preset_matches_table(self):
        cfg = load_config(resolve_preset('dist'))

        self.assertEqual(cfg.central_network.node_count, 8)
        self.assertEqual(len(cfg.autonomous_systems), 4)
        self.assertEqual(len(cfg.attackers), 12)
        self.assertEqual(cfg.targets, ('AS2-S0', 'AS3-S0'))
        self.assertEqual(len({name.split('-')[0] for name in cfg.attackers}), 4)

    def test_scalability_presets_match_table(self):
        shapes = {
            'sc1': (2, 2, 5, 10, 3, 4),
            'sc2': (4, 6, 15, 20, 3, 6),
            'sc3': (6, 12, 30, 60, 3, 12),
        }
        for name, expected in shapes.items():
            with self.subTest(preset=name):
                cfg = load_config(resolve_preset(name))
                shape = (
                    cfg.central_network.node_count,
                    len(cfg.autonomous_systems),
                    len(cfg.attackers),
                    len(cfg.hosts_with_role(Role.BENIGN)),
                    len(cfg.hosts_with_role(Role.TARGET)),
                    len(cfg.hosts_with_role(Role.NON_TARGET)),
                )
                self.assertEqual(shape, expected)

    def test_mixed_weights_accepted(self):
        cfg = parse_config(MIXED_VECTOR % '0.17')
        vector = cfg.vectors[0]

        self.assertEqual(vector.protocol, Protocol.MIXED)
        self.assertEqual(vector.size_dist.sizes, [36, 48, 96, 128, 256])
        self.assertAlmostEqual(vector.size_dist.mean_size, 88.36)
        self.assertEqual(vector.rate, 5e6)

    def test_mixed_weights_not_summing_to_one_rejected(self):
        with self.assertRaises(ValidationError) as ctx:
            parse_config(MIXED_VECTOR % '0.20')

        errors = ctx.exception.report.errors
        self.assertEqual(len(errors), 1)
        self.assertEqual(errors[0].path, 'vectors[0].size_dist')
        self.assertIn('1.03', errors[0].message)

    def test_unknown_key_reports_line(self):
        text = MINIMAL + "    uplink: 5\n"

        with self.assertRaises(ParseError) as ctx:
            parse_config(text)

        self.assertEqual(ctx.exception.line, 10)
        self.assertEqual(ctx.exception.key, 'autonomous_systems[0].uplink')

    def test_type_mismatch(self):
        with self.assertRaises(ParseError) as ctx:
            parse_config(MINIMAL.replace('client_count: 2', 'client_count: many'))

        self.assertIn('integer', ctx.exception.reason)

    def test_malformed_yaml(self):
        with self.assertRaises(ParseError):
            parse_config("name: [unclosed\n")

    def test_duplicate_key(self):
        with self.assertRaises(ParseError) as ctx:
            parse_config(MINIMAL + "duration: 5\n")

        self.assertEqual(ctx.exception.reason, 'duplicate key')

    def test_unit_suffixes(self):
        cfg = parse_config(SINGLE_VECTOR.replace('burst: 2', 'burst: 250ms') % ('attacker', '0.1', 'AS1-S0'))

        self.assertAlmostEqual(cfg.vectors[0].burst, 0.25)

    def test_parse_is_deterministic(self):
        text = resolve_preset('var2').read_text()

        self.assertEqual(parse_config(text), parse_config(text))

    def test_serialize_round_trip(self):
        for name in ('dist', 'var1', 'var2'):
            cfg = load_config(resolve_preset(name))
            self.assertEqual(parse_config(serialize(cfg)), cfg, name)

    def test_serialize_round_trip_with_overrides(self):
        text = SINGLE_VECTOR % ('attacker', '0.1', 'AS1-S0') + """
    offset: 1.5
    attackers: [AS0-C0, AS0-C2]
    overrides:
      AS0-C2: {rate: 1Mbps, size: 200, src_port: 4000}
"""
        text = text.replace("targets: [AS1-S0]\n", "") + "targets: [AS1-S0]\n"
        cfg = parse_config(text)
        params = cfg.vectors[0].params_for('AS0-C2')

        self.assertEqual(params.rate, 1e6)
        self.assertEqual(params.size_dist, SizeDistribution.fixed(200))
        self.assertEqual(params.src_port, 4000)
        self.assertEqual(params.dst_port, 80)
        self.assertEqual(cfg.vectors[0].params_for('AS0-C0').rate, 5e6)
        self.assertEqual(parse_config(serialize(cfg)), cfg)


class ValidateTests(SimpleTestCase):
    def test_presets_have_no_findings(self):
        for name in PRESETS:
            path = settings.PULSEWAVE_PRESETS_DIR / f"{name}.yaml"
            cfg = load_config(path, check=False)
            self.assertEqual(validate(cfg).findings, [], name)

    def test_target_with_benign_role(self):
        cfg = parse_config(SINGLE_VECTOR % ('benign', '0.1', 'AS0-C2'), check=False)
        report = validate(cfg)

        self.assertEqual(len(report.errors), 1)
        self.assertEqual(report.errors[0].path, 'targets[0]')
        self.assertFalse(report.ok)

    def test_attacker_as_target_rejected(self):
        cfg = parse_config(SINGLE_VECTOR % ('attacker', '0.1', 'AS0-C2'), check=False)

        self.assertIn("expected 'target'", validate(cfg).errors[0].message)

    def test_jitter_of_one(self):
        cfg = parse_config(SINGLE_VECTOR % ('attacker', '1.0', 'AS1-S0'), check=False)
        report = validate(cfg)

        self.assertEqual(len(report.errors), 1)
        self.assertEqual(report.errors[0].message, 'jitter must be < 1')

    def test_attackers_without_vectors(self):
        text = MINIMAL.replace('server_count: 1', 'server_count: 1\n    roles: {0: attacker}')
        report = validate(parse_config(text, check=False))

        self.assertEqual([f.path for f in report.errors], ['vectors'])

    def test_vectors_without_targets(self):
        text = (SINGLE_VECTOR % ('attacker', '0.1', 'AS1-S0')).replace('targets: [AS1-S0]', 'targets: []')
        report = validate(parse_config(text, check=False))

        self.assertIn('targets', [f.path for f in report.errors])

    def test_tcp_size_below_header(self):
        text = (SINGLE_VECTOR % ('attacker', '0.1', 'AS1-S0')).replace('protocol: UDP', 'protocol: TCP_SYN')
        text = text.replace('size: 96', 'size: 36')
        report = validate(parse_config(text, check=False))

        self.assertEqual([f.path for f in report.errors], ['vectors[0].size_dist'])

    def test_role_index_out_of_range(self):
        text = MINIMAL.replace('server_count: 1', 'server_count: 1\n    roles: {5: target}')
        report = validate(parse_config(text, check=False))

        self.assertEqual(report.errors[0].path, 'autonomous_systems[0].roles.5')

    def test_server_cannot_be_attacker(self):
        text = MINIMAL.replace('server_count: 1', 'server_count: 1\n    roles: {2: attacker}')
        report = validate(parse_config(text, check=False))

        self.assertIn('server nodes', report.errors[0].message)

    def test_unlisted_target_is_a_warning(self):
        text = MINIMAL.replace('server_count: 1', 'server_count: 1\n    roles: {2: target}')
        report = validate(parse_config(text, check=False))

        self.assertTrue(report.ok)
        self.assertEqual(len(report.warnings), 1)

    def test_override_for_unknown_attacker(self):
        text = SINGLE_VECTOR % ('attacker', '0.1', 'AS1-S0') + "    overrides:\n      AS1-C0: {rate: 1e6}\n"
        text = text.replace("targets: [AS1-S0]\n", "") + "targets: [AS1-S0]\n"
        report = validate(parse_config(text, check=False))

        self.assertEqual(report.errors[0].path, 'vectors[0].overrides.AS1-C0')

    def test_overlapping_offsets_warn(self):
        text = SINGLE_VECTOR % ('attacker', '0.1', 'AS1-S0') + """
  - id: V2
    protocol: ICMP
    size: 128
    rate: 1e6
    burst: 2
    offset: 0.5
"""
        text = text.replace("targets: [AS1-S0]\n", "") + "targets: [AS1-S0]\n"
        report = validate(parse_config(text, check=False))

        self.assertTrue(report.ok)
        self.assertEqual([f.path for f in report.warnings], ['vectors'])
