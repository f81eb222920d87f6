"""
Scenario Parser

Loads YAML scenario documents, rejects unknown keys, fills defaults and
returns an immutable ScenarioConfig. Semantic checks live in
scenario.validation so they can run on hand-built configs too.
"""

import logging
import re
from pathlib import Path
from typing import Any

import yaml
from django.conf import settings

from .exceptions import ParseError, ValidationError
from .models import (
    RANDOM_PORT,
    AsSpec,
    AttackerOverride,
    AttackVector,
    BenignSpec,
    CaptureSpec,
    CnSpec,
    Protocol,
    Role,
    ScenarioConfig,
    SizeDistribution,
)

logger = logging.getLogger('scenario')

_QUANTITY = re.compile(r'^\s*([-+]?[0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?)\s*([A-Za-z/]*)\s*$')

RATE_UNITS = {'': 1.0, 'bps': 1.0, 'kbps': 1e3, 'mbps': 1e6, 'gbps': 1e9}
TIME_UNITS = {'': 1.0, 's': 1.0, 'ms': 1e-3, 'us': 1e-6}


class _Section(dict):
    """Mapping that remembers where it and each of its keys came from."""

    def __init__(self):
        super().__init__()
        self.line: int | None = None
        self.key_lines: dict[Any, int] = {}


class _LineLoader(yaml.SafeLoader):
    pass


def _construct_section(loader: _LineLoader, node: yaml.MappingNode):
    section = _Section()
    yield section
    section.line = node.start_mark.line + 1
    loader.flatten_mapping(node)
    for key_node, value_node in node.value:
        key = loader.construct_object(key_node, deep=True)
        line = key_node.start_mark.line + 1
        if key in section:
            raise ParseError(line, str(key), "duplicate key")
        section[key] = loader.construct_object(value_node, deep=True)
        section.key_lines[key] = line


_LineLoader.add_constructor(yaml.resolver.BaseResolver.DEFAULT_MAPPING_TAG, _construct_section)


class _Fields:
    """
    Typed accessor over one YAML mapping.

    Every key must be consumed through ``take``; ``finish`` rejects the
    leftovers as unknown keys.
    """

    def __init__(self, section: Any, path: str, allowed: set[str]):
        if not isinstance(section, dict):
            raise ParseError(None, path, f"expected a mapping, got {type(section).__name__}")
        self.section = section
        self.path = path
        for key in section:
            if key not in allowed:
                raise ParseError(self.line_of(key), self.key_path(key), "unknown key")

    def line_of(self, key: Any = None) -> int | None:
        lines = getattr(self.section, 'key_lines', {})
        return lines.get(key, getattr(self.section, 'line', None))

    def key_path(self, key: Any) -> str:
        return f"{self.path}.{key}" if self.path else str(key)

    def error(self, key: Any, reason: str) -> ParseError:
        return ParseError(self.line_of(key), self.key_path(key), reason)

    def has(self, key: str) -> bool:
        return key in self.section and self.section[key] is not None

    def raw(self, key: str, default: Any = None, required: bool = False) -> Any:
        if not self.has(key):
            if required:
                raise ParseError(getattr(self.section, 'line', None), self.key_path(key), "missing required key")
            return default
        return self.section[key]

    def string(self, key: str, default: str | None = None, required: bool = False) -> str | None:
        value = self.raw(key, default, required)
        if value is None:
            return None
        if isinstance(value, bool) or not isinstance(value, (str, int)):
            raise self.error(key, f"expected a string, got {type(value).__name__}")
        return str(value)

    def integer(self, key: str, default: int | None = None, required: bool = False) -> int | None:
        value = self.raw(key, default, required)
        if value is None:
            return None
        if isinstance(value, bool) or not isinstance(value, int):
            if isinstance(value, float) and value.is_integer():
                return int(value)
            raise self.error(key, f"expected an integer, got {type(value).__name__}")
        return value

    def boolean(self, key: str, default: bool) -> bool:
        value = self.raw(key, default)
        if not isinstance(value, bool):
            raise self.error(key, f"expected true/false, got {type(value).__name__}")
        return value

    def number(self, key: str, default: float | None = None, required: bool = False,
               units: dict[str, float] | None = None) -> float | None:
        value = self.raw(key, default, required)
        if value is None:
            return None
        return _to_number(value, units, lambda reason: self.error(key, reason))

    def port(self, key: str, default: int | str | None) -> int | str | None:
        value = self.raw(key, default)
        if value is None:
            return None
        if isinstance(value, str) and value.upper() == RANDOM_PORT:
            return RANDOM_PORT
        if isinstance(value, bool) or not isinstance(value, int):
            raise self.error(key, f"expected a port number or {RANDOM_PORT}")
        return value


def _to_number(value: Any, units: dict[str, float] | None, error) -> float:
    if isinstance(value, bool):
        raise error("expected a number, got bool")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        # PyYAML reads "1e9" as a string; unit suffixes like "5Mbps" or "2ms" are accepted too
        match = _QUANTITY.match(value)
        if match:
            unit = match.group(2).lower()
            scale = (units or {'': 1.0}).get(unit)
            if scale is not None:
                return float(match.group(1)) * scale
            raise error(f"unknown unit '{match.group(2)}'")
    raise error(f"expected a number, got {type(value).__name__}")


def _parse_size_dist(fields: _Fields) -> SizeDistribution:
    has_size = fields.has('size')
    has_dist = fields.has('size_dist')
    if has_size == has_dist:
        raise fields.error('size', "exactly one of 'size' or 'size_dist' is required")
    if has_size:
        return SizeDistribution.fixed(fields.integer('size'))
    raw = fields.raw('size_dist')
    if not isinstance(raw, dict) or not raw:
        raise fields.error('size_dist', "expected a non-empty mapping size -> weight")
    entries = []
    for size, weight in raw.items():
        if isinstance(size, bool) or not isinstance(size, int):
            raise fields.error('size_dist', f"size '{size}' is not an integer")
        weight = _to_number(weight, None, lambda reason: fields.error('size_dist', reason))
        entries.append((size, weight))
    return SizeDistribution(entries=tuple(entries))


def _parse_cn(raw: Any) -> CnSpec:
    fields = _Fields(raw, 'central_network', {'node_count', 'redundancy', 'link_rate', 'link_delay', 'queue_len'})
    return CnSpec(
        node_count=fields.integer('node_count', required=True),
        redundancy=fields.number('redundancy', 0.0),
        link_rate=fields.number('link_rate', 1e9, units=RATE_UNITS),
        link_delay=fields.number('link_delay', 0.001, units=TIME_UNITS),
        queue_len=fields.integer('queue_len', 100),
    )


def _parse_as(raw: Any, index: int) -> AsSpec:
    path = f"autonomous_systems[{index}]"
    fields = _Fields(raw, path, {
        'id', 'client_count', 'server_count', 'roles', 'link_rate', 'link_delay', 'queue_len',
    })
    roles: dict[int, Role] = {}
    raw_roles = fields.raw('roles', {})
    if not isinstance(raw_roles, dict):
        raise fields.error('roles', "expected a mapping node-index -> role")
    for node_index, role in raw_roles.items():
        if isinstance(node_index, bool) or not isinstance(node_index, int):
            raise fields.error('roles', f"node index '{node_index}' is not an integer")
        if role not in Role.values:
            raise fields.error('roles', f"unknown role '{role}' (expected one of {', '.join(Role.values)})")
        roles[node_index] = Role(role)
    return AsSpec(
        id=fields.string('id', required=True),
        client_count=fields.integer('client_count', 0),
        server_count=fields.integer('server_count', 0),
        roles=dict(sorted(roles.items())),
        link_rate=fields.number('link_rate', 1e8, units=RATE_UNITS),
        link_delay=fields.number('link_delay', 0.0002, units=TIME_UNITS),
        queue_len=fields.integer('queue_len', 100),
    )


def _parse_override(raw: Any, path: str) -> AttackerOverride:
    fields = _Fields(raw, path, {'rate', 'size', 'size_dist', 'jitter', 'src_port', 'dst_port'})
    size_dist = None
    if fields.has('size') or fields.has('size_dist'):
        size_dist = _parse_size_dist(fields)
    return AttackerOverride(
        rate=fields.number('rate', units=RATE_UNITS),
        size_dist=size_dist,
        jitter=fields.number('jitter'),
        src_port=fields.port('src_port', None),
        dst_port=fields.port('dst_port', None),
    )


def _parse_vector(raw: Any, index: int) -> AttackVector:
    path = f"vectors[{index}]"
    fields = _Fields(raw, path, {
        'id', 'protocol', 'size', 'size_dist', 'rate', 'jitter', 'burst', 'switch',
        'src_port', 'dst_port', 'offset', 'attackers', 'overrides',
    })
    protocol = fields.string('protocol', required=True)
    if protocol.upper() not in Protocol.values:
        raise fields.error('protocol', f"unknown protocol '{protocol}' (expected one of {', '.join(Protocol.values)})")

    attackers = fields.raw('attackers', [])
    if not isinstance(attackers, list) or not all(isinstance(name, str) for name in attackers):
        raise fields.error('attackers', "expected a list of attacker node names")

    raw_overrides = fields.raw('overrides', {})
    if not isinstance(raw_overrides, dict):
        raise fields.error('overrides', "expected a mapping attacker -> parameters")
    overrides = {
        str(name): _parse_override(value, f"{path}.overrides.{name}")
        for name, value in raw_overrides.items()
    }

    return AttackVector(
        id=fields.string('id', required=True),
        protocol=Protocol(protocol.upper()),
        size_dist=_parse_size_dist(fields),
        rate=fields.number('rate', required=True, units=RATE_UNITS),
        burst=fields.number('burst', required=True, units=TIME_UNITS),
        jitter=fields.number('jitter', 0.1),
        switch=fields.number('switch', 0.0, units=TIME_UNITS),
        src_port=fields.port('src_port', RANDOM_PORT),
        dst_port=fields.port('dst_port', 80),
        offset=fields.number('offset', None, units=TIME_UNITS),
        attackers=tuple(attackers),
        overrides=overrides,
    )


def _parse_benign(raw: Any) -> BenignSpec:
    fields = _Fields(raw, 'benign', {
        'request_size', 'response_packets_mean', 'response_packet_size', 'think_time_mean',
        'include_targets', 'server_port',
    })
    return BenignSpec(
        request_size=fields.integer('request_size', 400),
        response_packets_mean=fields.number('response_packets_mean', 10.0),
        response_packet_size=fields.integer('response_packet_size', 1500),
        think_time_mean=fields.number('think_time_mean', 1.0, units=TIME_UNITS),
        include_targets=fields.boolean('include_targets', True),
        server_port=fields.integer('server_port', 80),
    )


def _parse_capture(raw: Any, name: str) -> CaptureSpec:
    fields = _Fields(raw, 'capture', {'prefix', 'suffix', 'bidirectional', 'include_as_links'})
    return CaptureSpec(
        prefix=fields.string('prefix', name),
        suffix=fields.string('suffix', 'cap'),
        bidirectional=fields.boolean('bidirectional', True),
        include_as_links=fields.boolean('include_as_links', False),
    )


def parse_config(text: str, check: bool = True) -> ScenarioConfig:
    """
    Parse a YAML scenario document into a fully default-filled ScenarioConfig.

    Args:
        text: YAML document (one scenario)
        check: Run semantic validation and raise on errors

    Returns:
        Resolved ScenarioConfig

    Raises:
        ParseError: Malformed YAML, unknown keys, type mismatches
        ValidationError: Semantic invariant violations (when check is set)
    """
    try:
        document = yaml.load(text, Loader=_LineLoader)
    except yaml.MarkedYAMLError as e:
        line = e.problem_mark.line + 1 if e.problem_mark else None
        raise ParseError(line, '', f"malformed YAML: {e.problem}") from e
    except yaml.YAMLError as e:
        raise ParseError(None, '', f"malformed YAML: {e}") from e

    if document is None:
        raise ParseError(None, '', "empty document")

    fields = _Fields(document, '', {
        'name', 'seed', 'duration', 'central_network', 'autonomous_systems',
        'vectors', 'targets', 'benign', 'capture',
    })
    name = fields.string('name', required=True)

    systems = fields.raw('autonomous_systems', [])
    if not isinstance(systems, list):
        raise fields.error('autonomous_systems', "expected a list")
    vectors = fields.raw('vectors', [])
    if not isinstance(vectors, list):
        raise fields.error('vectors', "expected a list")
    targets = fields.raw('targets', [])
    if not isinstance(targets, list) or not all(isinstance(target, str) for target in targets):
        raise fields.error('targets', "expected a list of server node names")

    cfg = ScenarioConfig(
        name=name,
        seed=fields.integer('seed', 0),
        duration=fields.number('duration', required=True, units=TIME_UNITS),
        central_network=_parse_cn(fields.raw('central_network', required=True)),
        autonomous_systems=tuple(_parse_as(raw, index) for index, raw in enumerate(systems)),
        vectors=tuple(_parse_vector(raw, index) for index, raw in enumerate(vectors)),
        targets=tuple(targets),
        benign=_parse_benign(fields.raw('benign', {})),
        capture=_parse_capture(fields.raw('capture', {}), name),
    )

    if check:
        from .validation import validate

        report = validate(cfg)
        for finding in report.warnings:
            logger.warning(f"{finding.path}: {finding.message}")
        if report.errors:
            raise ValidationError(report)
    return cfg


def load_config(path: str | Path, check: bool = True) -> ScenarioConfig:
    """Read and parse a UTF-8 scenario file."""
    text = Path(path).read_text(encoding='utf-8')
    logger.debug(f"Loaded scenario file {path}")
    return parse_config(text, check=check)


def resolve_preset(name_or_path: str) -> Path:
    """
    Resolve a scenario argument to a file.

    Existing paths win; otherwise bare names like ``var1`` are looked up
    in the presets directory.
    """
    path = Path(name_or_path)
    if path.exists():
        return path
    presets_dir = Path(getattr(settings, 'PULSEWAVE_PRESETS_DIR', 'presets'))
    for candidate in (presets_dir / name_or_path, presets_dir / f"{name_or_path.lower()}.yaml"):
        if candidate.exists():
            return candidate
    return path


def _dist_to_yaml(dist: SizeDistribution) -> dict:
    return {size: weight for size, weight in dist.entries}


def _override_to_yaml(override: AttackerOverride) -> dict:
    data = {}
    if override.rate is not None:
        data['rate'] = override.rate
    if override.size_dist is not None:
        data['size_dist'] = _dist_to_yaml(override.size_dist)
    if override.jitter is not None:
        data['jitter'] = override.jitter
    if override.src_port is not None:
        data['src_port'] = override.src_port
    if override.dst_port is not None:
        data['dst_port'] = override.dst_port
    return data


def to_document(cfg: ScenarioConfig) -> dict:
    """Plain-data form of a config with every default spelled out."""
    cn = cfg.central_network
    return {
        'name': cfg.name,
        'seed': cfg.seed,
        'duration': cfg.duration,
        'central_network': {
            'node_count': cn.node_count,
            'redundancy': cn.redundancy,
            'link_rate': cn.link_rate,
            'link_delay': cn.link_delay,
            'queue_len': cn.queue_len,
        },
        'autonomous_systems': [
            {
                'id': spec.id,
                'client_count': spec.client_count,
                'server_count': spec.server_count,
                'roles': {index: role.value for index, role in spec.roles.items()},
                'link_rate': spec.link_rate,
                'link_delay': spec.link_delay,
                'queue_len': spec.queue_len,
            }
            for spec in cfg.autonomous_systems
        ],
        'vectors': [
            {
                'id': vector.id,
                'protocol': vector.protocol.value,
                'size_dist': _dist_to_yaml(vector.size_dist),
                'rate': vector.rate,
                'jitter': vector.jitter,
                'burst': vector.burst,
                'switch': vector.switch,
                'src_port': vector.src_port,
                'dst_port': vector.dst_port,
                'offset': vector.offset,
                'attackers': list(vector.attackers),
                'overrides': {name: _override_to_yaml(o) for name, o in vector.overrides.items()},
            }
            for vector in cfg.vectors
        ],
        'targets': list(cfg.targets),
        'benign': {
            'request_size': cfg.benign.request_size,
            'response_packets_mean': cfg.benign.response_packets_mean,
            'response_packet_size': cfg.benign.response_packet_size,
            'think_time_mean': cfg.benign.think_time_mean,
            'include_targets': cfg.benign.include_targets,
            'server_port': cfg.benign.server_port,
        },
        'capture': {
            'prefix': cfg.capture.prefix,
            'suffix': cfg.capture.suffix,
            'bidirectional': cfg.capture.bidirectional,
            'include_as_links': cfg.capture.include_as_links,
        },
    }


def serialize(cfg: ScenarioConfig) -> str:
    """Resolved YAML document; ``parse_config(serialize(cfg)) == cfg``."""
    return yaml.safe_dump(to_document(cfg), sort_keys=False, allow_unicode=True)
