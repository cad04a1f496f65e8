"""Nodes, static routes, periodic traffic and the on/off schedule."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .engine import (
    DEADLINE_EXPIRY,
    NODE_OFF,
    NODE_ON,
    PACKET_RELEASE,
    EventQueue,
    SimulationError,
)
from .mac import CsmaCa, MacTxState
from .metrics import MISSED_DROPPED, MISSED_EXPIRED, ON_TIME, Metrics

ROLES = ("source", "interferer", "relay", "actuator")


@dataclass(eq=False, slots=True)
class Packet:
    id: int
    flow: str
    size_bytes: int
    released: int
    deadline: int
    route: tuple[str, ...]
    hop: int = 0
    done: bool = False

    @property
    def holder(self) -> str:
        return self.route[self.hop]

    @property
    def next_hop(self) -> str:
        return self.route[self.hop + 1]

    @property
    def hops_remaining(self) -> tuple[str, ...]:
        return self.route[self.hop + 1:]


@dataclass(eq=False)
class Node:
    id: str
    role: str
    active: bool = False
    queue: deque[Packet] = field(default_factory=deque)
    attempt: MacTxState | None = None
    ready_at: int = 0
    mac_gen: int = 0


@dataclass(eq=False)
class Flow:
    id: str
    source: str
    sink: str
    route: tuple[str, ...]
    period: int
    period_min: int
    period_max: int
    managed: bool
    activation: tuple[tuple[int, int | None], ...]
    size_bytes: int = 45
    release_gen: int = 0
    # (time, period) each time the period is (re)set, starting at t=0
    period_history: list[tuple[int, int]] = field(default_factory=list)

    def set_period(self, now: int, period: int) -> None:
        if not self.period_min <= period <= self.period_max:
            raise SimulationError(
                f"flow {self.id}: period {period} us outside [{self.period_min}, {self.period_max}]"
            )
        self.period = period
        self.period_history.append((now, period))


class Network:
    """Traffic generation, queueing and relaying on top of the MAC."""

    def __init__(
        self,
        nodes: dict[str, Node],
        flows: dict[str, Flow],
        queue: EventQueue,
        metrics: Metrics,
        queue_capacity: int,
        end_us: int,
    ) -> None:
        self.nodes = nodes
        self.flows = flows
        self.queue = queue
        self.metrics = metrics
        self.queue_capacity = queue_capacity
        self.end_us = end_us
        self.mac: CsmaCa | None = None
        self._next_packet_id = 0
        self._flow_by_source = {f.source: f for f in flows.values()}
        for flow in flows.values():
            flow.period_history.append((0, flow.period))

    def apply_schedule(self) -> None:
        """Queue NodeOn/NodeOff events. Non-source nodes are on from t=0."""
        sources = set(self._flow_by_source)
        for node in self.nodes.values():
            if node.id not in sources:
                self.queue.schedule(0, NODE_ON, node.id)
        for flow in self.flows.values():
            for on, off in flow.activation:
                if on < self.end_us:
                    self.queue.schedule(on, NODE_ON, flow.source)
                if off is not None and off < self.end_us:
                    self.queue.schedule(off, NODE_OFF, flow.source)

    def node_on(self, node_id: str) -> None:
        node = self.nodes[node_id]
        if node.active:
            return
        node.active = True
        flow = self._flow_by_source.get(node_id)
        if flow is not None:
            flow.release_gen += 1
            self.queue.schedule(self.queue.now, PACKET_RELEASE, (flow.id, flow.release_gen))

    def node_off(self, node_id: str) -> None:
        node = self.nodes[node_id]
        if not node.active:
            return
        node.active = False
        node.mac_gen += 1
        flow = self._flow_by_source.get(node_id)
        if flow is not None:
            flow.release_gen += 1
        if node.attempt is not None:
            self._drop(node.attempt.packet)
            node.attempt = None
        while node.queue:
            self._drop(node.queue.popleft())

    def release_packet(self, flow_id: str) -> Packet | None:
        """Create the next sample of ``flow_id`` and schedule the one after it.

        The relative deadline is the period in force at release. Nothing is
        released whose deadline would not expire before the run ends.
        """
        flow = self.flows[flow_id]
        now = self.queue.now
        source = self.nodes[flow.source]
        if not source.active:
            return None
        deadline = now + flow.period
        if deadline + 1 >= self.end_us:
            return None
        packet = Packet(
            id=self._next_packet_id,
            flow=flow.id,
            size_bytes=flow.size_bytes,
            released=now,
            deadline=deadline,
            route=flow.route,
        )
        self._next_packet_id += 1
        self.metrics.record_release(packet)
        # first instant at which the packet can no longer be on time
        self.queue.schedule(deadline + 1, DEADLINE_EXPIRY, packet)
        self.queue.schedule(now + flow.period, PACKET_RELEASE, (flow.id, flow.release_gen))
        self._enqueue(source, packet)
        return packet

    def on_deadline_expiry(self, packet: Packet) -> None:
        if not packet.done:
            self._record(packet, MISSED_EXPIRED)

    def forward(self, packet: Packet, relay: Node) -> None:
        if not packet.hops_remaining:
            raise SimulationError(f"packet {packet.id} has no hop beyond {relay.id}")
        self._enqueue(relay, packet)

    def on_mac_complete(self, node: Node, packet: Packet, status: str) -> None:
        if status == "delivered":
            if not packet.done:
                packet.hop += 1
                holder = self.nodes[packet.holder]
                if packet.holder == packet.route[-1]:
                    self._record(packet, ON_TIME if self.queue.now <= packet.deadline else MISSED_EXPIRED)
                else:
                    self.forward(packet, holder)
        elif status != "abandoned":
            self._drop(packet)
        self.serve_next(node)

    def serve_next(self, node: Node) -> None:
        """Start CSMA for the first still-live packet at the head of ``node``'s queue."""
        if not node.active or node.attempt is not None:
            return
        now = self.queue.now
        while node.queue:
            packet = node.queue.popleft()
            if packet.done:
                continue
            if now > packet.deadline:
                self._record(packet, MISSED_EXPIRED)
                continue
            self.mac.begin_csma(node, packet, not_before=node.ready_at)
            return

    def _enqueue(self, node: Node, packet: Packet) -> None:
        in_service = 1 if node.attempt is not None else 0
        if len(node.queue) + in_service >= self.queue_capacity:
            if node.queue:
                self._drop(node.queue.popleft())
            else:
                self._drop(packet)
                return
        node.queue.append(packet)
        self.serve_next(node)

    def _drop(self, packet: Packet) -> None:
        if not packet.done:
            self._record(packet, MISSED_DROPPED)

    def _record(self, packet: Packet, outcome: str) -> None:
        packet.done = True
        self.metrics.record_outcome(packet, outcome, self.queue.now)
