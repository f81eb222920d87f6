"""
Scenario Validation

Semantic checks over a structurally complete ScenarioConfig. Returns a
report instead of raising so callers can list every problem at once.
"""

import math
import re
from dataclasses import dataclass, field

from .models import (
    CLIENT_ROLES,
    MIN_PACKET_SIZE,
    PROTOCOL_MIN_SIZE,
    RANDOM_PORT,
    SERVER_ROLES,
    AttackVector,
    Protocol,
    Role,
    ScenarioConfig,
    SizeDistribution,
)

TOKEN = re.compile(r'^[A-Za-z0-9-]+$')
WEIGHT_TOLERANCE = 1e-9
MAX_LINKS = 65536

ERROR = 'error'
WARNING = 'warning'


@dataclass(frozen=True)
class Finding:
    severity: str
    path: str
    message: str

    def __str__(self):
        return f"[{self.severity}] {self.path}: {self.message}"


@dataclass
class ValidationReport:
    findings: list[Finding] = field(default_factory=list)

    @property
    def errors(self) -> list[Finding]:
        return [f for f in self.findings if f.severity == ERROR]

    @property
    def warnings(self) -> list[Finding]:
        return [f for f in self.findings if f.severity == WARNING]

    @property
    def ok(self) -> bool:
        return not self.errors

    def error(self, path: str, message: str) -> None:
        self.findings.append(Finding(ERROR, path, message))

    def warning(self, path: str, message: str) -> None:
        self.findings.append(Finding(WARNING, path, message))


def _is_token(value: str) -> bool:
    return bool(TOKEN.match(value)) and '__' not in value


def _check_port(report: ValidationReport, path: str, port) -> None:
    if port is None or port == RANDOM_PORT:
        return
    if not 0 <= port <= 65535:
        report.error(path, f"port {port} outside 0-65535")


def _check_size_dist(report: ValidationReport, path: str, dist: SizeDistribution, protocol: Protocol) -> None:
    minimum = PROTOCOL_MIN_SIZE.get(protocol, MIN_PACKET_SIZE)
    for size, weight in dist.entries:
        if size < minimum:
            report.error(path, f"size {size} below the {protocol.value} minimum of {minimum} bytes")
        if size > 65535:
            report.error(path, f"size {size} exceeds the IPv4 maximum")
        if not weight > 0:
            report.error(path, f"weight for size {size} must be > 0")
    total = sum(dist.weights)
    if not math.isclose(total, 1.0, rel_tol=0.0, abs_tol=WEIGHT_TOLERANCE):
        report.error(path, f"weights sum to {total:.6g}, expected 1")


def _check_vector(report: ValidationReport, cfg: ScenarioConfig, vector: AttackVector, path: str,
                  attackers: set[str]) -> None:
    if not _is_token(vector.id):
        report.error(f"{path}.id", f"'{vector.id}' is not a valid id (letters, digits, dash)")
    if not vector.rate > 0:
        report.error(f"{path}.rate", "rate must be > 0")
    if not vector.burst > 0:
        report.error(f"{path}.burst", "burst must be > 0")
    if not vector.switch >= 0:
        report.error(f"{path}.switch", "switch must be >= 0")
    if not 0 <= vector.jitter:
        report.error(f"{path}.jitter", "jitter must be >= 0")
    if not vector.jitter < 1:
        report.error(f"{path}.jitter", "jitter must be < 1")
    if vector.offset is not None and not vector.offset >= 0:
        report.error(f"{path}.offset", "offset must be >= 0")
    _check_size_dist(report, f"{path}.size_dist", vector.size_dist, vector.protocol)
    _check_port(report, f"{path}.src_port", vector.src_port)
    _check_port(report, f"{path}.dst_port", vector.dst_port)

    for name in vector.attackers:
        if name not in attackers:
            report.error(f"{path}.attackers", f"'{name}' is not a node with role attacker")
    executing = set(cfg.attackers_for(vector))
    for name, override in vector.overrides.items():
        override_path = f"{path}.overrides.{name}"
        if name not in executing:
            report.error(override_path, f"'{name}' does not execute vector {vector.id}")
        if override.rate is not None and not override.rate > 0:
            report.error(f"{override_path}.rate", "rate must be > 0")
        if override.jitter is not None and not 0 <= override.jitter < 1:
            report.error(f"{override_path}.jitter", "jitter must be >= 0 and < 1")
        if override.size_dist is not None:
            _check_size_dist(report, f"{override_path}.size_dist", override.size_dist, vector.protocol)
        _check_port(report, f"{override_path}.src_port", override.src_port)
        _check_port(report, f"{override_path}.dst_port", override.dst_port)


def validate(cfg: ScenarioConfig) -> ValidationReport:
    """
    Check every scenario invariant.

    Args:
        cfg: Structurally complete scenario

    Returns:
        ValidationReport; zero findings iff all invariants hold
    """
    report = ValidationReport()

    if not _is_token(cfg.name):
        report.error('name', f"'{cfg.name}' is not a valid name (letters, digits, dash)")
    if not cfg.duration > 0:
        report.error('duration', "duration must be > 0")
    if not 0 <= cfg.seed < 2 ** 64:
        report.error('seed', "seed must be an unsigned 64-bit integer")

    cn = cfg.central_network
    if cn.node_count < 1:
        report.error('central_network.node_count', "node_count must be >= 1")
    if not 0 <= cn.redundancy <= 1:
        report.error('central_network.redundancy', "redundancy must be within [0, 1]")
    if not cn.link_rate > 0:
        report.error('central_network.link_rate', "link_rate must be > 0")
    if not cn.link_delay >= 0:
        report.error('central_network.link_delay', "link_delay must be >= 0")
    if cn.queue_len < 1:
        report.error('central_network.queue_len', "queue_len must be >= 1")

    # Node roles
    seen_ids: set[str] = set()
    roles: dict[str, Role] = {}
    link_count = max(cn.node_count, 1) * (max(cn.node_count, 1) - 1) // 2
    for index, spec in enumerate(cfg.autonomous_systems):
        path = f"autonomous_systems[{index}]"
        if not _is_token(spec.id):
            report.error(f"{path}.id", f"'{spec.id}' is not a valid id (letters, digits, dash)")
        if spec.id in seen_ids:
            report.error(f"{path}.id", f"duplicate AS id '{spec.id}'")
        seen_ids.add(spec.id)
        if spec.client_count < 0 or spec.server_count < 0:
            report.error(path, "client_count and server_count must be >= 0")
        if not spec.link_rate > 0:
            report.error(f"{path}.link_rate", "link_rate must be > 0")
        if not spec.link_delay >= 0:
            report.error(f"{path}.link_delay", "link_delay must be >= 0")
        if spec.queue_len < 1:
            report.error(f"{path}.queue_len", "queue_len must be >= 1")

        host_count = spec.client_count + spec.server_count
        for node_index, role in spec.roles.items():
            if not 0 <= node_index < host_count:
                report.error(f"{path}.roles.{node_index}", f"node index outside 0..{host_count - 1}")
            elif node_index < spec.client_count and role not in CLIENT_ROLES:
                report.error(f"{path}.roles.{node_index}", f"client nodes cannot have role '{role.value}'")
            elif node_index >= spec.client_count and role not in SERVER_ROLES:
                report.error(f"{path}.roles.{node_index}", f"server nodes cannot have role '{role.value}'")
        for host_index, name in enumerate(spec.host_names()):
            roles[name] = spec.role_of(host_index)
        link_count += 1 + max(host_count, 0)

    if link_count > MAX_LINKS:
        report.error('autonomous_systems', f"{link_count} links exceed the 10.0.0.0/8 /30 address plan ({MAX_LINKS})")

    attackers = {name for name, role in roles.items() if role == Role.ATTACKER}

    # Vectors
    vector_ids: set[str] = set()
    for index, vector in enumerate(cfg.vectors):
        path = f"vectors[{index}]"
        if vector.id in vector_ids:
            report.error(f"{path}.id", f"duplicate vector id '{vector.id}'")
        vector_ids.add(vector.id)
        _check_vector(report, cfg, vector, path, attackers)
        if not cfg.attackers_for(vector):
            report.warning(path, f"vector {vector.id} has no attackers and will stay silent")

    if attackers and not cfg.vectors:
        report.error('vectors', "attackers are declared but no attack vectors are configured")

    # Targets
    if cfg.vectors and not cfg.targets:
        report.error('targets', "attack vectors need at least one target")
    for index, target in enumerate(cfg.targets):
        path = f"targets[{index}]"
        if target not in roles:
            report.error(path, f"'{target}' is not a declared node")
        elif roles[target] != Role.TARGET:
            report.error(path, f"'{target}' has role '{roles[target].value}', expected 'target'")
        if target in cfg.targets[:index]:
            report.error(path, f"duplicate target '{target}'")
    for name, role in roles.items():
        if role == Role.TARGET and name not in cfg.targets:
            report.warning('targets', f"'{name}' has role target but is not in the target list")

    # Benign model
    benign = cfg.benign
    if benign.request_size < PROTOCOL_MIN_SIZE[Protocol.TCP_SYN]:
        report.error('benign.request_size', "request_size must hold IPv4 + TCP headers (>= 40)")
    if benign.response_packet_size < PROTOCOL_MIN_SIZE[Protocol.TCP_SYN]:
        report.error('benign.response_packet_size', "response_packet_size must hold IPv4 + TCP headers (>= 40)")
    if not benign.response_packets_mean >= 1:
        report.error('benign.response_packets_mean', "response_packets_mean must be >= 1")
    if not benign.think_time_mean > 0:
        report.error('benign.think_time_mean', "think_time_mean must be > 0")
    _check_port(report, 'benign.server_port', benign.server_port)
    if any(role == Role.BENIGN for role in roles.values()) and not cfg.server_pool():
        report.error('benign', "benign clients are declared but the server pool is empty")

    # Capture naming
    for key in ('prefix', 'suffix'):
        value = getattr(cfg.capture, key)
        if not _is_token(value):
            report.error(f"capture.{key}", f"'{value}' is not a valid file token (letters, digits, dash)")

    _check_overlap(report, cfg)
    return report


def _check_overlap(report: ValidationReport, cfg: ScenarioConfig) -> None:
    """Explicit offsets may make vectors overlap; that is allowed but flagged."""
    if not any(vector.offset is not None for vector in cfg.vectors) or not cfg.targets:
        return
    from scheduling.timetable import build_timetable

    try:
        timetable = build_timetable(cfg.vectors, cfg.targets, cfg.duration)
    except (ValueError, ZeroDivisionError):
        return
    if timetable.has_overlap():
        report.warning('vectors', "explicit offsets make vector ON windows overlap")
