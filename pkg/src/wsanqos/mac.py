"""Single collision domain channel with unslotted CSMA/CA (IEEE 802.15.4 style).

Every frame on air, including acknowledgments, is a :class:`Transmission`
interval ``[start, end)`` on the shared :class:`Channel`. Any two intervals
overlapping by at least 1 us are both corrupted (no capture). Carrier sense
looks at the CCA window ``[t - cca, t)`` that ends when the backoff expires,
so two nodes finishing CCA in the same microsecond both transmit and collide.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import TYPE_CHECKING, Callable

from .engine import ACK_TIMEOUT, MAC_BACKOFF_EXPIRED, TX_END, EventQueue, Rng

if TYPE_CHECKING:
    from .network import Node, Packet


@dataclass(frozen=True)
class MacParams:
    data_rate_bps: int = 250_000
    symbol_us: int = 16
    unit_backoff_symbols: int = 20
    min_be: int = 3
    max_be: int = 5
    max_csma_backoffs: int = 4
    cca_symbols: int = 8
    ack_enabled: bool = True
    max_retries: int = 3
    ack_bytes: int = 11
    ifs_us: int = 192
    queue_capacity: int = 20

    def validate(self, path: str = "mac") -> list[str]:
        errors = []
        for f in fields(self):
            value = getattr(self, f.name)
            if f.type in ("bool", bool):
                if not isinstance(value, bool):
                    errors.append(f"{path}.{f.name}: expected a boolean, got {value!r}")
            elif isinstance(value, bool) or not isinstance(value, int):
                errors.append(f"{path}.{f.name}: expected an integer, got {value!r}")
            elif value < 0:
                errors.append(f"{path}.{f.name}: must be >= 0, got {value}")
        if errors:
            return errors
        if self.data_rate_bps <= 0:
            errors.append(f"{path}.data_rate_bps: must be > 0")
        if self.symbol_us <= 0:
            errors.append(f"{path}.symbol_us: must be > 0")
        if self.min_be > self.max_be:
            errors.append(f"{path}.min_be: must be <= max_be ({self.min_be} > {self.max_be})")
        if self.ack_bytes <= 0:
            errors.append(f"{path}.ack_bytes: must be > 0")
        if self.queue_capacity < 1:
            errors.append(f"{path}.queue_capacity: must be >= 1")
        return errors

    @property
    def unit_backoff_us(self) -> int:
        return self.unit_backoff_symbols * self.symbol_us

    @property
    def cca_us(self) -> int:
        return self.cca_symbols * self.symbol_us


def frame_airtime(size_bytes: int, params: MacParams) -> int:
    """Airtime in whole microseconds, rounded up."""
    if size_bytes <= 0:
        raise ValueError(f"frame size must be positive, got {size_bytes}")
    return math.ceil(size_bytes * 8 * 1_000_000 / params.data_rate_bps)


def backoff_delay(rng: Rng, be: int, params: MacParams) -> int:
    """Random backoff ``U{0..2^be-1}`` unit backoff periods, in us."""
    return rng.rand_int(0, (1 << be) - 1) * params.unit_backoff_us


@dataclass(eq=False, slots=True)
class Transmission:
    node: str
    start: int
    end: int
    is_ack: bool = False
    collided: bool = False


class Channel:
    """Shared medium. Keeps every interval that may still matter."""

    def __init__(self, horizon_us: int) -> None:
        # intervals ending more than horizon_us in the past can no longer
        # overlap a CCA window or a new frame
        self.horizon_us = horizon_us
        self.transmissions: list[Transmission] = []
        self.collisions = 0

    @property
    def busy_until(self) -> int:
        return max((t.end for t in self.transmissions), default=0)

    def active_transmitters(self, now: int) -> set[str]:
        return {t.node for t in self.transmissions if t.start <= now < t.end}

    def _prune(self, now: int) -> None:
        cutoff = now - self.horizon_us
        if any(t.end <= cutoff for t in self.transmissions):
            self.transmissions = [t for t in self.transmissions if t.end > cutoff]

    def busy_during(self, start: int, end: int) -> bool:
        """True if any frame occupies some instant of ``[start, end)``."""
        self._prune(end)
        return any(t.start < end and t.end > start for t in self.transmissions)

    def transmit(self, node: str, start: int, duration: int, is_ack: bool = False) -> Transmission:
        tx = Transmission(node, start, start + duration, is_ack)
        self._prune(start)
        for other in self.transmissions:
            if other.start < tx.end and tx.start < other.end:
                if not other.collided:
                    self.collisions += 1
                other.collided = True
                tx.collided = True
        self.transmissions.append(tx)
        return tx


@dataclass(slots=True)
class MacTxState:
    """CSMA/CA attempt state for the packet a node is currently serving."""

    packet: Packet
    be: int
    nb: int = 0
    retries_used: int = 0
    frame: Transmission | None = None
    ack: Transmission | None = None


class CsmaCa:
    """Unslotted CSMA/CA with optional acknowledgments and retransmissions.

    ``on_complete(node, packet, status)`` fires once per attempt with status
    ``delivered``, ``channel_access_failure``, ``retries_exhausted``,
    ``collision`` (lost without ack) or ``abandoned`` (packet already missed
    its deadline, checked at every MAC decision point).
    Events carry ``(node_id, generation)``; bumping ``node.mac_gen`` turns
    every pending MAC event for that node into a no-op.
    """

    def __init__(
        self,
        params: MacParams,
        queue: EventQueue,
        rng: Rng,
        channel: Channel,
        on_complete: Callable[[Node, Packet, str], None],
    ) -> None:
        self.params = params
        self.queue = queue
        self.rng = rng
        self.channel = channel
        self.on_complete = on_complete
        self.ack_airtime = frame_airtime(params.ack_bytes, params)
        self.channel_access_failures = 0
        self.retry_exhaustions = 0

    def begin_csma(self, node: Node, packet: Packet, not_before: int | None = None) -> None:
        if node.attempt is not None:
            raise RuntimeError(f"{node.id}: CSMA attempt already in progress")
        node.attempt = MacTxState(packet, be=self.params.min_be)
        self._schedule_backoff(node, not_before)

    def _schedule_backoff(self, node: Node, not_before: int | None = None) -> None:
        start = self.queue.now if not_before is None else max(self.queue.now, not_before)
        delay = backoff_delay(self.rng, node.attempt.be, self.params)
        # the event marks the end of the CCA that follows the backoff
        self.queue.schedule(start + delay + self.params.cca_us, MAC_BACKOFF_EXPIRED, (node.id, node.mac_gen))

    def on_backoff_expired(self, node: Node) -> None:
        attempt = node.attempt
        now = self.queue.now
        if attempt.packet.done:
            self._finish(node, "abandoned")
            return
        if self.channel.busy_during(now - self.params.cca_us, now):
            attempt.nb += 1
            attempt.be = min(attempt.be + 1, self.params.max_be)
            if attempt.nb > self.params.max_csma_backoffs:
                self.channel_access_failures += 1
                self._finish(node, "channel_access_failure")
            else:
                self._schedule_backoff(node)
            return
        airtime = frame_airtime(attempt.packet.size_bytes, self.params)
        attempt.frame = self.channel.transmit(node.id, now, airtime)
        self.queue.schedule(now + airtime, TX_END, (node.id, node.mac_gen))

    def on_tx_end(self, node: Node) -> None:
        attempt = node.attempt
        now = self.queue.now
        p = self.params
        if not p.ack_enabled:
            # sender cannot learn about a collision without acks
            if attempt.frame.collided:
                self._finish(node, "collision", gap=p.ifs_us)
            else:
                self._finish(node, "delivered", gap=p.ifs_us)
            return
        if not attempt.frame.collided:
            receiver = attempt.packet.next_hop
            attempt.ack = self.channel.transmit(receiver, now + p.ifs_us, self.ack_airtime, is_ack=True)
        self.queue.schedule(now + p.ifs_us + self.ack_airtime, ACK_TIMEOUT, (node.id, node.mac_gen))

    def on_ack_timeout(self, node: Node) -> None:
        attempt = node.attempt
        ok = not attempt.frame.collided and attempt.ack is not None and not attempt.ack.collided
        if ok:
            self._finish(node, "delivered", gap=self.params.ifs_us)
            return
        if attempt.packet.done:
            self._finish(node, "abandoned", gap=self.params.ifs_us)
            return
        attempt.retries_used += 1
        if attempt.retries_used > self.params.max_retries:
            self.retry_exhaustions += 1
            self._finish(node, "retries_exhausted", gap=self.params.ifs_us)
            return
        attempt.be = self.params.min_be
        attempt.nb = 0
        attempt.frame = None
        attempt.ack = None
        self._schedule_backoff(node)

    def _finish(self, node: Node, status: str, gap: int = 0) -> None:
        packet = node.attempt.packet
        node.attempt = None
        node.ready_at = self.queue.now + gap
        self.on_complete(node, packet, status)
