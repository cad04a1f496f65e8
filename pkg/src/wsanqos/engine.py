"""Deterministic discrete-event core: integer clock, event heap, seeded PRNG.

Time is an integer count of microseconds. Events are ordered by ``(at, seq)``
where ``seq`` is the global issue order, so simultaneous events pop in the
order they were scheduled.
"""

from __future__ import annotations

import heapq
from typing import Any, NamedTuple

MASK64 = (1 << 64) - 1

US_PER_MS = 1_000
US_PER_S = 1_000_000


def ms(value: float) -> int:
    """Milliseconds to integer microseconds."""
    return int(round(value * US_PER_MS))


def seconds(value: float) -> int:
    """Seconds to integer microseconds."""
    return int(round(value * US_PER_S))


class SimulationError(RuntimeError):
    """Fatal logic error inside a run (scheduling in the past, double record...)."""


# event kinds
PACKET_RELEASE = "PacketRelease"
MAC_BACKOFF_EXPIRED = "MacBackoffExpired"
TX_END = "TxEnd"
ACK_TIMEOUT = "AckTimeout"
CONTROLLER_TICK = "ControllerTick"
NODE_ON = "NodeOn"
NODE_OFF = "NodeOff"
DEADLINE_EXPIRY = "DeadlineExpiry"
SIM_END = "SimEnd"

EVENT_KINDS = (
    PACKET_RELEASE,
    MAC_BACKOFF_EXPIRED,
    TX_END,
    ACK_TIMEOUT,
    CONTROLLER_TICK,
    NODE_ON,
    NODE_OFF,
    DEADLINE_EXPIRY,
    SIM_END,
)


class Event(NamedTuple):
    at: int
    seq: int
    kind: str
    subject: Any = None


class Exhausted:
    """Sentinel returned by :meth:`EventQueue.advance` when nothing is pending."""

    def __repr__(self) -> str:
        return "EXHAUSTED"


EXHAUSTED = Exhausted()


class EventQueue:
    """Priority queue of events plus the virtual clock."""

    def __init__(self) -> None:
        self._heap: list[Event] = []
        self._next_seq = 0
        self.now = 0
        self.popped = 0

    def __len__(self) -> int:
        return len(self._heap)

    def schedule(self, at: int, kind: str, subject: Any = None) -> Event:
        if at < self.now:
            raise SimulationError(
                f"cannot schedule {kind}({subject!r}) at t={at} us; clock is at {self.now} us"
            )
        event = Event(at, self._next_seq, kind, subject)
        self._next_seq += 1
        heapq.heappush(self._heap, event)
        return event

    def schedule_in(self, delay: int, kind: str, subject: Any = None) -> Event:
        return self.schedule(self.now + delay, kind, subject)

    def advance(self) -> Event | Exhausted:
        if not self._heap:
            return EXHAUSTED
        event = heapq.heappop(self._heap)
        self.now = event.at
        self.popped += 1
        return event


def splitmix64(state: int) -> tuple[int, int]:
    """One SplitMix64 step. Returns ``(new_state, output)``."""
    state = (state + 0x9E3779B97F4A7C15) & MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return state, z ^ (z >> 31)


def fnv1a64(data: bytes) -> int:
    h = 0xCBF29CE484222325
    for byte in data:
        h ^= byte
        h = (h * 0x100000001B3) & MASK64
    return h


def derive_seed(seed: int, label: str) -> int:
    """Child seed for a named sub-stream: SplitMix64 output of ``seed ^ fnv1a64(label)``."""
    _, out = splitmix64((seed ^ fnv1a64(label.encode("utf-8"))) & MASK64)
    return out


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & MASK64


class Rng:
    """xoshiro256** seeded through SplitMix64.

    Bounded integers use bitmask rejection, so draws are exactly uniform and
    the consumed stream depends only on the requested ranges.
    """

    def __init__(self, seed: int) -> None:
        if not 0 <= seed <= MASK64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
        self.seed = seed
        sm = seed
        s = []
        for _ in range(4):
            sm, out = splitmix64(sm)
            s.append(out)
        self._s = s
        self.draws = 0

    def next_u64(self) -> int:
        s0, s1, s2, s3 = self._s
        result = (_rotl((s1 * 5) & MASK64, 7) * 9) & MASK64
        t = (s1 << 17) & MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self._s = [s0, s1, s2, s3]
        self.draws += 1
        return result

    def rand_int(self, lo: int, hi: int) -> int:
        """Uniform integer in ``[lo, hi]`` inclusive."""
        if lo > hi:
            raise SimulationError(f"rand_int: empty range [{lo}, {hi}]")
        span = hi - lo
        if span == 0:
            return lo
        mask = (1 << span.bit_length()) - 1
        while True:
            candidate = self.next_u64() & mask
            if candidate <= span:
                return lo + candidate
