"""
Discrete-Event Simulator

Single-threaded event loop over one global (time, seq) queue:
- APP_SEND / FLOW_START inject attack and benign packets at hosts
- RETARGET applies a timetable window to every app of one vector
- QUEUE_DEQUEUE frees a transmitter and starts the next queued packet
- LINK_DELIVER hands a packet to the far end for forwarding
- SIM_END closes the application phase; the network then drains

A packet is captured when its first bit leaves an egress interface, and
arrives at ``start + serialization + propagation delay``.
"""

import logging
import time
from pathlib import Path

from django.conf import settings
from django.utils import timezone

from capture.exceptions import CaptureWriteError
from capture.runlog import write_run_log
from capture.writer import CaptureSet, append_packet
from core.units import seconds_to_ns
from scenario.models import Role, ScenarioConfig
from scheduling.timetable import Timetable, Window, build_timetable
from topology.builder import build_topology
from topology.models import Topology
from traffic.generators import AttackerApp, BenignApp, make_responses
from traffic.packets import KIND_REQUEST, Packet

from .events import Event, EventKind, EventQueue
from .exceptions import NoRoute
from .links import Direction
from .report import RunReport

logger = logging.getLogger('engine')

DEFAULT_PROGRESS_INTERVAL = 10.0


class Simulator:
    """
    One run of one scenario over a built topology and timetable.

    Args:
        cfg: Validated scenario
        topo: Topology with routes
        timetable: Global attack schedule
        captures: Open capture points, or None to run without pcaps
    """

    def __init__(self, cfg: ScenarioConfig, topo: Topology, timetable: Timetable,
                 captures: CaptureSet | None = None):
        self.cfg = cfg
        self.topo = topo
        self.timetable = timetable
        self.duration = seconds_to_ns(cfg.duration)
        self.queue = EventQueue()
        self.report = RunReport(scenario=cfg.name, seed=cfg.seed)

        self.directions: dict[tuple[int, int], Direction] = {}
        for link in topo.links:
            for src, dst in ((link.a, link.b), (link.b, link.a)):
                name = f"{topo.nodes[src].name}-to-{topo.nodes[dst].name}"
                direction = Direction(link, src, dst, name)
                if captures is not None:
                    direction.capture = captures.get(src, dst)
                self.directions[(src, dst)] = direction

        self.attackers: dict[str, list[tuple[AttackerApp, int]]] = {}
        self.benign: list[tuple[BenignApp, int]] = []
        self._windows = {}
        self._build_apps()
        self._handlers = {
            EventKind.APP_SEND: self._on_app_send,
            EventKind.RETARGET: self._on_retarget,
            EventKind.LINK_DELIVER: self._on_deliver,
            EventKind.QUEUE_DEQUEUE: self._on_dequeue,
            EventKind.FLOW_START: self._on_flow_start,
            EventKind.SIM_END: self._on_sim_end,
        }

    def _build_apps(self):
        topo, cfg = self.topo, self.cfg
        targets = {name: topo.host_address(topo.node_id(name)) for name in cfg.targets}
        for vector in cfg.vectors:
            apps = []
            for attacker in cfg.attackers_for(vector):
                node = topo.node_id(attacker)
                app = AttackerApp(attacker, topo.host_address(node), vector, vector.params_for(attacker),
                                  targets, cfg.seed)
                apps.append((app, node))
            self.attackers[vector.id] = apps

        servers = [(name, topo.host_address(topo.node_id(name))) for name in cfg.server_pool()]
        if servers:
            for client in cfg.hosts_with_role(Role.BENIGN):
                node = topo.node_id(client)
                self.benign.append((BenignApp(client, topo.host_address(node), servers, cfg.benign, cfg.seed), node))
        logger.debug(
            f"{sum(len(apps) for apps in self.attackers.values())} attacker apps, "
            f"{len(self.benign)} benign clients, {len(self.directions)} link directions"
        )

    # ------------------------------------------------------------------
    # Packet path
    # ------------------------------------------------------------------

    def transmit(self, direction: Direction, packet: Packet, t: int) -> bool:
        """
        Offer ``packet`` to the egress queue of ``direction`` at ``t``.

        Returns:
            False if the queue was full and the packet was dropped
        """
        direction.counters.tx += 1
        direction.counters.tx_bytes += packet.size
        if not direction.queue.offer(packet):
            direction.counters.drop += 1
            return False
        if not direction.busy:
            self._start_transmission(direction, t)
        return True

    def _start_transmission(self, direction: Direction, t: int):
        packet = direction.queue.head()
        direction.busy = True
        finished = t + direction.serialization(packet.size)
        if direction.capture is not None:
            append_packet(direction.capture, t, packet.to_bytes())
        self.queue.push(finished, EventKind.QUEUE_DEQUEUE, direction)
        self.queue.push(finished + direction.delay, EventKind.LINK_DELIVER, (direction, packet))

    def forward(self, node: int, packet: Packet, t: int):
        """Deliver locally if ``node`` owns the destination, else enqueue toward the next hop."""
        owner = self.topo.owner_of(packet.dst)
        if owner == node:
            self._deliver_local(node, packet, t)
            return
        following = self.topo.routes.next_hop(node, owner) if owner is not None else None
        if following is None:
            raise NoRoute(self.topo.nodes[node].name, packet.dst)
        self.transmit(self.directions[(node, following)], packet, t)

    def _deliver_local(self, node: int, packet: Packet, t: int):
        self.report.delivered += 1
        if packet.kind != KIND_REQUEST or t >= self.duration:
            return
        for response in make_responses(packet, self.cfg.benign):
            self.report.benign_packets += 1
            self.forward(node, response, t)

    # ------------------------------------------------------------------
    # Event handlers
    # ------------------------------------------------------------------

    def _on_app_send(self, t: int, payload: tuple[AttackerApp, int]):
        app, node = payload
        if t >= self.duration:
            app.pending = False
            return
        packet, next_t = app.on_send(t)
        if packet is not None:
            self.report.attack_packets += 1
            self.forward(node, packet, t)
        if next_t is None:
            return
        if next_t < self.duration:
            self.queue.push(next_t, EventKind.APP_SEND, payload)
        else:
            app.pending = False

    def _on_retarget(self, t: int, window: Window):
        for app, node in self.attackers[window.vector_id]:
            if app.on_retarget(t, window.target, window.end):
                self.queue.push(t, EventKind.APP_SEND, (app, node))
        self._schedule_next_window(window.vector_id)

    def _schedule_next_window(self, vector_id: str):
        window = next(self._windows[vector_id], None)
        if window is not None:
            self.queue.push(window.start, EventKind.RETARGET, window)

    def _on_flow_start(self, t: int, payload: tuple[BenignApp, int]):
        if t >= self.duration:
            return
        app, node = payload
        request, next_t = app.on_flow_start(t)
        self.report.benign_packets += 1
        self.forward(node, request, t)
        if next_t < self.duration:
            self.queue.push(next_t, EventKind.FLOW_START, payload)

    def _on_dequeue(self, t: int, direction: Direction):
        direction.queue.pop()
        direction.busy = False
        if direction.queue.occupancy:
            self._start_transmission(direction, t)

    def _on_deliver(self, t: int, payload: tuple[Direction, Packet]):
        direction, packet = payload
        direction.counters.rx += 1
        self.forward(direction.dst, packet, t)

    def _on_sim_end(self, t: int, _payload):
        logger.info(f"Applications stopped at {t / 1e9:.3f}s, draining {len(self.queue)} queued events")

    # ------------------------------------------------------------------
    # Main loop
    # ------------------------------------------------------------------

    def _seed_events(self):
        for vector_id in self.attackers:
            self._windows[vector_id] = self.timetable.iter_windows(vector_id)
            self._schedule_next_window(vector_id)
        for app, node in self.benign:
            first = app.next_think()
            if first < self.duration:
                self.queue.push(first, EventKind.FLOW_START, (app, node))
        self.queue.push(self.duration, EventKind.SIM_END)

    def dispatch(self, event: Event):
        self._handlers[event.kind](event.time, event.payload)

    def run(self) -> RunReport:
        """
        Execute every event until the queue is empty.

        Returns:
            RunReport with link, packet and per-vector counters
        """
        interval = seconds_to_ns(getattr(settings, 'PULSEWAVE_PROGRESS_INTERVAL', DEFAULT_PROGRESS_INTERVAL))
        next_progress = interval
        events = 0

        self._seed_events()
        while self.queue:
            event = self.queue.pop()
            if interval > 0 and event.time >= next_progress:
                logger.info(f"{self.cfg.name}: t={event.time / 1e9:.1f}s, {events} events, {len(self.queue)} pending")
                while next_progress <= event.time:
                    next_progress += interval
            self.dispatch(event)
            events += 1

        self.report.events = events
        self.collect()
        return self.report

    def collect(self):
        """Copy live counters into the report."""
        self.report.links = {direction.name: direction.counters for direction in self.directions.values()}
        self.report.vector_sent = {
            vector_id: sum(app.sent for app, _ in apps) for vector_id, apps in self.attackers.items()
        }
        self.report.vector_bytes = {
            vector_id: sum(app.sent_bytes for app, _ in apps) for vector_id, apps in self.attackers.items()
        }


def run(cfg: ScenarioConfig, out_dir: Path) -> RunReport:
    """
    Build, simulate and record one scenario.

    Captures and the run log land in ``out_dir``, which must exist.

    Args:
        cfg: Validated scenario
        out_dir: Output directory

    Returns:
        RunReport

    Raises:
        CaptureWriteError: A capture file or the run log could not be
            written; files written so far are flagged partial in the log
    """
    started_at = timezone.now()
    clock = time.perf_counter()
    out_dir = Path(out_dir)

    topo = build_topology(cfg)
    timetable = build_timetable(cfg.vectors, cfg.targets, cfg.duration)
    captures = CaptureSet.plan(topo, cfg.capture, out_dir)
    simulator = Simulator(cfg, topo, timetable, captures)
    report = simulator.report
    logger.info(f"Running {cfg.name}: {cfg.duration}s, seed {cfg.seed}, {len(captures)} capture points")

    failure = None
    try:
        captures.open_all()
        report = simulator.run()
    except CaptureWriteError as e:
        failure = e
        report.aborted = True
        simulator.collect()
        logger.error(f"Run aborted: {e}")

    failed = captures.close_all()
    if failed and failure is None:
        report.aborted = True
        failure = CaptureWriteError(failed[0].path, "close failed")
    if report.aborted:
        report.partial_files = [point.filename for point in captures if point.path.exists()]

    report.capture_counters = captures.counters()
    report.started_at = started_at
    report.wall_clock = time.perf_counter() - clock
    report.run_log = write_run_log(cfg, topo, timetable, report, out_dir)

    if failure is not None:
        raise failure
    logger.info(report.summary())
    return report
