"""One simulation run: wires engine, MAC, network, QoS manager and metrics."""

from __future__ import annotations

from dataclasses import dataclass

from . import engine as ev
from .config import ScenarioConfig
from .engine import EXHAUSTED, EventQueue, Rng, SimulationError, derive_seed, ms, seconds
from .mac import Channel, CsmaCa
from .metrics import Metrics, RunSummary, summarize
from .network import Flow, Network, Node
from .qos import make_manager

# label of the run's single RNG stream; the same for every manager so that
# open- and closed-loop runs with one seed see identical draws until the
# first period change
RNG_LABEL = "run"


def build_flows(config: ScenarioConfig) -> dict[str, Flow]:
    flows = {}
    for fs in config.flows:
        flows[fs.id] = Flow(
            id=fs.id,
            source=fs.source,
            sink=fs.sink,
            route=fs.route,
            period=ms(fs.period_ms),
            period_min=ms(fs.period_min_ms),
            period_max=ms(fs.period_max_ms),
            managed=fs.managed,
            activation=tuple((seconds(on), None if off is None else seconds(off)) for on, off in fs.activation),
            size_bytes=fs.size_bytes,
        )
    return flows


@dataclass
class RunResult:
    config: ScenarioConfig
    summary: RunSummary
    metrics: Metrics
    flows: dict[str, Flow]
    events: int
    trace: list[str] | None
    mac_stats: dict[str, int]


class Simulation:
    def __init__(self, config: ScenarioConfig, trace: bool = False) -> None:
        self.config = config
        self.end_us = seconds(config.duration_s)
        self.queue = EventQueue()
        self.rng = Rng(derive_seed(config.seed, RNG_LABEL))
        self.nodes = {n.id: Node(n.id, n.role) for n in config.nodes}
        self.flows = build_flows(config)
        self.metrics = Metrics(self.flows, config.controller.interval_us)
        self.network = Network(
            self.nodes, self.flows, self.queue, self.metrics, config.mac.queue_capacity, self.end_us
        )
        self.channel = Channel(horizon_us=config.mac.cca_us + 1)
        self.mac = CsmaCa(config.mac, self.queue, self.rng, self.channel, self.network.on_mac_complete)
        self.network.mac = self.mac
        self.manager = make_manager(config.manager, config.controller)
        self.trace: list[str] | None = [] if trace else None

    def _mac_node(self, subject) -> Node | None:
        node_id, gen = subject
        node = self.nodes[node_id]
        if gen != node.mac_gen or node.attempt is None:
            return None
        return node

    def _trace(self, event: ev.Event) -> None:
        subject = event.subject
        if event.kind == ev.DEADLINE_EXPIRY:
            detail = f"packet={subject.id} flow={subject.flow}"
        elif isinstance(subject, tuple):
            detail = f"{subject[0]} gen={subject[1]}"
        elif subject is None:
            detail = "-"
        else:
            detail = str(subject)
        self.trace.append(f"{event.at} {event.seq} {event.kind} {detail}")

    def _controller_tick(self) -> None:
        now = self.queue.now
        for flow in self.flows.values():
            if not flow.managed:
                continue
            new = self.manager.tick(flow, self.metrics, now)
            if new != flow.period:
                flow.set_period(now, new)
        nxt = now + self.config.controller.interval_us
        if nxt < self.end_us:
            self.queue.schedule(nxt, ev.CONTROLLER_TICK)

    def run(self) -> RunResult:
        q = self.queue
        q.schedule(self.end_us, ev.SIM_END)
        self.network.apply_schedule()
        if self.config.controller.interval_us < self.end_us:
            q.schedule(self.config.controller.interval_us, ev.CONTROLLER_TICK)
        last = 0
        while True:
            event = q.advance()
            if event is EXHAUSTED:
                raise SimulationError("event queue exhausted before SimEnd")
            if event.at < last:
                raise SimulationError("clock moved backwards")
            last = event.at
            if self.trace is not None:
                self._trace(event)
            kind = event.kind
            if kind == ev.MAC_BACKOFF_EXPIRED:
                node = self._mac_node(event.subject)
                if node is not None:
                    self.mac.on_backoff_expired(node)
            elif kind == ev.TX_END:
                node = self._mac_node(event.subject)
                if node is not None:
                    self.mac.on_tx_end(node)
            elif kind == ev.ACK_TIMEOUT:
                node = self._mac_node(event.subject)
                if node is not None:
                    self.mac.on_ack_timeout(node)
            elif kind == ev.PACKET_RELEASE:
                flow_id, gen = event.subject
                if gen == self.flows[flow_id].release_gen:
                    self.network.release_packet(flow_id)
            elif kind == ev.DEADLINE_EXPIRY:
                self.network.on_deadline_expiry(event.subject)
            elif kind == ev.CONTROLLER_TICK:
                self._controller_tick()
            elif kind == ev.NODE_ON:
                self.network.node_on(event.subject)
            elif kind == ev.NODE_OFF:
                self.network.node_off(event.subject)
            elif kind == ev.SIM_END:
                break
            else:
                raise SimulationError(f"unknown event kind {kind!r}")

        if self.metrics.pending():
            raise SimulationError(f"{self.metrics.pending()} packets unresolved at SimEnd")
        summary = summarize(
            self.metrics, self.flows, self.end_us, self.config.seed, self.config.digest(), self.config.manager
        )
        return RunResult(
            config=self.config,
            summary=summary,
            metrics=self.metrics,
            flows=self.flows,
            events=q.popped,
            trace=self.trace,
            mac_stats={
                "collisions": self.channel.collisions,
                "channel_access_failures": self.mac.channel_access_failures,
                "retry_exhaustions": self.mac.retry_exhaustions,
            },
        )


def run_scenario(config: ScenarioConfig, trace: bool = False) -> RunResult:
    return Simulation(config, trace=trace).run()
