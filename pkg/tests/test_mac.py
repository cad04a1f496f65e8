import dataclasses

import pytest

from wsanqos import engine as ev
from wsanqos.engine import EXHAUSTED, EventQueue, Rng
from wsanqos.mac import Channel, CsmaCa, MacParams, backoff_delay, frame_airtime
from wsanqos.network import Node, Packet
from wsanqos.sim import run_scenario

from conftest import assert_conserved, flow, make_config

DEFAULTS = MacParams()


class Harness:
    """Drives CsmaCa alone: no traffic generator, no deadlines."""

    def __init__(self, params=DEFAULTS, channel=None, seed=3):
        self.queue = EventQueue()
        self.channel = channel or Channel(horizon_us=params.cca_us + 1)
        self.done = []
        self.mac = CsmaCa(params, self.queue, Rng(seed), self.channel, self._complete)
        self.nodes = {}
        self.tx_starts = []

    def _complete(self, node, packet, status):
        self.done.append((node.id, packet.id, status, self.queue.now))

    def send(self, node_id, packet_id=0, dest="a1"):
        node = self.nodes.setdefault(node_id, Node(node_id, "source", active=True))
        packet = Packet(packet_id, node_id, 45, 0, 10**9, (node_id, dest))
        self.mac.begin_csma(node, packet)
        return node

    def run(self):
        handlers = {
            ev.MAC_BACKOFF_EXPIRED: self.mac.on_backoff_expired,
            ev.TX_END: self.mac.on_tx_end,
            ev.ACK_TIMEOUT: self.mac.on_ack_timeout,
        }
        while (event := self.queue.advance()) is not EXHAUSTED:
            node = self.nodes[event.subject[0]]
            handlers[event.kind](node)
            attempt = node.attempt
            if (
                event.kind == ev.MAC_BACKOFF_EXPIRED
                and attempt is not None
                and attempt.frame is not None
                and attempt.frame.start == self.queue.now
            ):
                self.tx_starts.append((node.id, self.queue.now))


def test_data_frame_airtime():
    assert frame_airtime(45, DEFAULTS) == 1440


def test_ack_frame_airtime():
    assert frame_airtime(11, DEFAULTS) == 352


def test_airtime_unit_sanity():
    assert frame_airtime(1, MacParams(data_rate_bps=8)) == 1_000_000


def test_airtime_rounds_up():
    assert frame_airtime(1, MacParams(data_rate_bps=3)) == 2_666_667


def test_backoff_values_be3():
    rng = Rng(5)
    values = {backoff_delay(rng, 3, DEFAULTS) for _ in range(2000)}
    assert values == {k * 320 for k in range(8)}


def test_backoff_max_be5():
    rng = Rng(5)
    assert max(backoff_delay(rng, 5, DEFAULTS) for _ in range(5000)) == 9920


def test_mac_params_validation():
    assert MacParams().validate() == []
    errors = MacParams(min_be=6, max_be=5, data_rate_bps=0).validate()
    assert any("min_be" in e for e in errors)
    assert any("data_rate_bps" in e for e in errors)


def test_channel_overlap_rule():
    ch = Channel(horizon_us=200)
    a = ch.transmit("x", 0, 100)
    b = ch.transmit("y", 100, 100)  # touches, no overlap
    assert not a.collided and not b.collided
    c = ch.transmit("z", 199, 10)  # overlaps b by 1 us
    assert b.collided and c.collided
    assert not a.collided


def test_channel_busy_window_and_active_set():
    ch = Channel(horizon_us=200)
    ch.transmit("x", 50, 100)
    assert ch.busy_during(0, 51)
    assert not ch.busy_during(0, 50)
    assert not ch.busy_during(150, 300)
    assert ch.active_transmitters(60) == {"x"}
    assert ch.busy_until == 150


def test_lone_transmitter_with_ack_timing():
    h = Harness()
    h.send("s1")
    h.run()
    (node, pid, status, t_done), = h.done
    (_, t_start), = h.tx_starts
    assert status == "delivered"
    assert t_done - t_start == 1440 + 192 + 352
    # the backoff ends on a 320 us boundary, then the 128 us CCA
    assert (t_start - 128) % 320 == 0


def test_idle_channel_transmits_right_after_cca():
    h = Harness(MacParams(min_be=0, max_be=0))
    h.send("s1")
    h.run()
    assert h.tx_starts == [("s1", 128)]


def test_without_ack_delivery_at_frame_end():
    h = Harness(MacParams(ack_enabled=False))
    h.send("s1")
    h.run()
    (_, t_start), = h.tx_starts
    assert h.done[0][2] == "delivered"
    assert h.done[0][3] == t_start + 1440


def test_busy_channel_exhausts_backoffs():
    ch = Channel(horizon_us=10**9)
    ch.transmit("jammer", 0, 10**8)
    h = Harness(channel=ch)
    node = h.send("s1")
    h.run()
    assert h.done == [("s1", 0, "channel_access_failure", h.done[0][3])]
    assert h.mac.channel_access_failures == 1
    assert node.attempt is None
    assert h.tx_starts == []


def test_busy_channel_backoff_count():
    ch = Channel(horizon_us=10**9)
    ch.transmit("jammer", 0, 10**8)
    h = Harness(channel=ch)
    h.send("s1")
    cca_events = 0
    while (event := h.queue.advance()) is not EXHAUSTED:
        cca_events += 1
        h.mac.on_backoff_expired(h.nodes["s1"])
    # initial CCA plus max_csma_backoffs retries
    assert cca_events == DEFAULTS.max_csma_backoffs + 1


def test_simultaneous_cca_collides_and_both_retry():
    h = Harness(MacParams(min_be=0, max_be=0))
    h.send("s1", 0)
    h.send("s2", 1)
    h.run()
    starts = [t for _, t in h.tx_starts]
    # 1 + max_retries attempts each, all colliding
    assert len(starts) == 2 * (1 + DEFAULTS.max_retries)
    assert {s for s in h.done} == {
        ("s1", 0, "retries_exhausted", h.done[0][3]),
        ("s2", 1, "retries_exhausted", h.done[1][3]),
    }
    assert all(tx.collided for tx in h.channel.transmissions if not tx.is_ack)


def test_retry_limit_with_hostile_channel():
    class Hostile(Channel):
        def transmit(self, node, start, duration, is_ack=False):
            tx = super().transmit(node, start, duration, is_ack)
            tx.collided = True
            return tx

    params = MacParams(max_retries=2)
    h = Harness(params, channel=Hostile(horizon_us=params.cca_us + 1))
    h.send("s1")
    h.run()
    assert len(h.tx_starts) == 3
    assert h.done[0][2] == "retries_exhausted"
    assert h.mac.retry_exhaustions == 1


def test_ack_collision_triggers_retry():
    h = Harness(MacParams(min_be=0, max_be=0))
    h.send("s1")
    # a frame from a hidden clock lands in the ack window
    h.channel.transmit("x", 128 + 1440 + 192 + 10, 50)
    h.run()
    assert len(h.tx_starts) == 2
    assert h.done[0][2] == "delivered"


def test_abandoned_when_packet_already_missed():
    h = Harness()
    node = h.send("s1")
    node.attempt.packet.done = True
    h.run()
    assert h.done[0][2] == "abandoned"
    assert h.tx_starts == []


def test_single_flow_never_misses():
    config = make_config([flow("s1", ["s1", "a1"])], duration_s=10)
    result = run_scenario(config)
    fs = result.summary.flows["s1"]
    assert fs.released > 900
    assert fs.on_time == fs.released
    assert_conserved(result)


def test_single_flow_never_misses_without_ack():
    config = make_config([flow("s1", ["s1", "a1"])], duration_s=5, mac={"ack_enabled": False})
    result = run_scenario(config)
    assert result.summary.flows["s1"].avg_dmr == 0.0
    assert_conserved(result)


@pytest.mark.parametrize("mac", [{}, {"ack_enabled": False}, {"queue_capacity": 1}, {"max_retries": 0}])
def test_conservation_under_contention(mac):
    flows = [
        flow("s1", ["s1", "a1"]),
        flow("s2", ["s2", "a1"]),
        flow("s3", ["s3", "s6", "a2"]),
        flow("s5", ["s5", "a2"], managed=False),
    ]
    result = run_scenario(make_config(flows, duration_s=5, mac=mac))
    assert_conserved(result)
    assert result.mac_stats["collisions"] > 0


def test_channel_capacity_in_full_run():
    # no two successfully delivered frames can overlap on air
    result = run_scenario(make_config(
        [flow("s1", ["s1", "a1"]), flow("s2", ["s2", "a1"]), flow("s5", ["s5", "a2"], managed=False)],
        duration_s=3,
        mac={"ack_enabled": False},
        ), trace=True)
    airtime = 1440
    deliveries = sorted(
        e.when for entries in result.metrics.ledger.values() for e in entries if e.outcome == "on_time"
    )
    assert all(b - a >= airtime for a, b in zip(deliveries, deliveries[1:]))
