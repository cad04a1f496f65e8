"""End-to-end deadline accounting, windowed DMR and CSV/trace outputs.

Every packet is bucketed into the measurement window containing its
absolute deadline, whatever the time its outcome was decided.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Iterable

from .engine import SimulationError

if TYPE_CHECKING:
    from .network import Flow, Packet

ON_TIME = "on_time"
MISSED_EXPIRED = "missed_expired"
MISSED_DROPPED = "missed_dropped"
OUTCOMES = (ON_TIME, MISSED_EXPIRED, MISSED_DROPPED)

TIMESERIES_COLUMNS = ("time_s", "flow", "window_dmr", "period_ms", "released", "missed")
SUMMARY_COLUMNS = (
    "flow",
    "avg_dmr",
    "released",
    "on_time",
    "missed_expired",
    "missed_dropped",
    "final_period_ms",
)


class OutputError(OSError):
    pass


@dataclass(slots=True)
class LedgerEntry:
    packet_id: int
    flow: str
    released: int
    deadline: int
    outcome: str | None = None
    when: int | None = None

    @property
    def delivery_time(self) -> int | None:
        return self.when if self.outcome == ON_TIME else None


@dataclass
class DmrSample:
    flow: str
    window_start: int
    window_end: int
    released: int
    missed: int
    dmr: float


class Metrics:
    """Append-only per-flow ledger plus running per-window counters."""

    def __init__(self, flow_ids: Iterable[str], window_us: int) -> None:
        if window_us <= 0:
            raise ValueError("window length must be positive")
        self.window_us = window_us
        self.ledger: dict[str, list[LedgerEntry]] = {f: [] for f in flow_ids}
        self._entries: dict[int, LedgerEntry] = {}
        self._released: dict[str, dict[int, int]] = {f: {} for f in self.ledger}
        self._on_time: dict[str, dict[int, int]] = {f: {} for f in self.ledger}
        self._last_dmr: dict[str, float | None] = {f: None for f in self.ledger}

    def window_of(self, deadline: int) -> int:
        return deadline // self.window_us

    def record_release(self, packet: Packet) -> None:
        entry = LedgerEntry(packet.id, packet.flow, packet.released, packet.deadline)
        self.ledger[packet.flow].append(entry)
        self._entries[packet.id] = entry
        w = self.window_of(packet.deadline)
        counts = self._released[packet.flow]
        counts[w] = counts.get(w, 0) + 1

    def record_outcome(self, packet: Packet, outcome: str, when: int) -> None:
        entry = self._entries[packet.id]
        if entry.outcome is not None:
            raise SimulationError(
                f"packet {packet.id} already recorded as {entry.outcome}, cannot record {outcome}"
            )
        if outcome not in OUTCOMES:
            raise ValueError(f"unknown outcome {outcome!r}")
        if outcome == ON_TIME and when > entry.deadline:
            raise SimulationError(f"packet {packet.id} delivered at {when} after deadline {entry.deadline}")
        entry.outcome = outcome
        entry.when = when
        if outcome == ON_TIME:
            w = self.window_of(entry.deadline)
            counts = self._on_time[packet.flow]
            counts[w] = counts.get(w, 0) + 1

    def measure_dmr(self, flow: str, window_start: int, window_end: int, now: int, default: float) -> DmrSample:
        """DMR over packets whose deadline lies in ``[window_start, window_end)``.

        Every such packet has its deadline behind ``now``, so anything not yet
        on time is a miss. With no releases the previous sample is repeated
        (``default`` before the first one).
        """
        if window_end > now:
            raise SimulationError(f"window end {window_end} is in the future (now={now})")
        first = window_start // self.window_us
        last = -(-window_end // self.window_us)
        released = sum(self._released[flow].get(w, 0) for w in range(first, last))
        on_time = sum(self._on_time[flow].get(w, 0) for w in range(first, last))
        missed = released - on_time
        if released:
            dmr = missed / released
            self._last_dmr[flow] = dmr
        else:
            prev = self._last_dmr[flow]
            dmr = default if prev is None else prev
        return DmrSample(flow, window_start, window_end, released, missed, dmr)

    def pending(self) -> int:
        return sum(1 for e in self._entries.values() if e.outcome is None)


@dataclass
class WindowStat:
    start: int
    end: int
    released: int
    missed: int
    period: int

    @property
    def dmr(self) -> float | None:
        return self.missed / self.released if self.released else None


@dataclass
class FlowSummary:
    flow: str
    managed: bool
    released: int
    on_time: int
    missed_expired: int
    missed_dropped: int
    final_period: int
    windows: list[WindowStat] = field(default_factory=list)

    @property
    def missed(self) -> int:
        return self.missed_expired + self.missed_dropped

    @property
    def avg_dmr(self) -> float | None:
        return self.missed / self.released if self.released else None


@dataclass
class RunSummary:
    flows: dict[str, FlowSummary]
    seed: int
    config_digest: str
    manager: str

    @property
    def managed(self) -> list[FlowSummary]:
        return [f for f in self.flows.values() if f.managed]


def period_at(history: list[tuple[int, int]], t: int) -> int:
    """Period in force at time ``t`` given ``(time, period)`` change points."""
    current = history[0][1]
    for when, period in history:
        if when > t:
            break
        current = period
    return current


def summarize(
    metrics: Metrics,
    flows: dict[str, Flow],
    end_us: int,
    seed: int,
    config_digest: str,
    manager: str,
) -> RunSummary:
    n_windows = -(-end_us // metrics.window_us)
    out = {}
    for flow_id, flow in flows.items():
        counts = dict.fromkeys(OUTCOMES, 0)
        released = [0] * n_windows
        missed = [0] * n_windows
        for entry in metrics.ledger[flow_id]:
            if entry.outcome is None:
                raise SimulationError(f"packet {entry.packet_id} of {flow_id} has no outcome at run end")
            counts[entry.outcome] += 1
            w = metrics.window_of(entry.deadline)
            released[w] += 1
            if entry.outcome != ON_TIME:
                missed[w] += 1
        windows = []
        for w in range(n_windows):
            start = w * metrics.window_us
            end = min(start + metrics.window_us, end_us)
            windows.append(WindowStat(start, end, released[w], missed[w], period_at(flow.period_history, start)))
        out[flow_id] = FlowSummary(
            flow=flow_id,
            managed=flow.managed,
            released=len(metrics.ledger[flow_id]),
            on_time=counts[ON_TIME],
            missed_expired=counts[MISSED_EXPIRED],
            missed_dropped=counts[MISSED_DROPPED],
            final_period=flow.period,
            windows=windows,
        )
    return RunSummary(out, seed, config_digest, manager)


def _fmt(x: float | None) -> str:
    return "" if x is None else "%.6f" % x


def timeseries_rows(summary: RunSummary) -> list[list[str]]:
    rows = []
    n = max((len(f.windows) for f in summary.managed), default=0)
    for w in range(n):
        for fs in summary.managed:
            win = fs.windows[w]
            rows.append([
                _fmt(win.end / 1e6),
                fs.flow,
                _fmt(win.dmr),
                _fmt(win.period / 1e3),
                str(win.released),
                str(win.missed),
            ])
    return rows


def summary_rows(summary: RunSummary) -> list[list[str]]:
    return [
        [
            fs.flow,
            _fmt(fs.avg_dmr),
            str(fs.released),
            str(fs.on_time),
            str(fs.missed_expired),
            str(fs.missed_dropped),
            _fmt(fs.final_period / 1e3),
        ]
        for fs in summary.managed
    ]


def _write_atomic(path: Path, write) -> None:
    tmp = path.with_name(path.name + ".tmp")
    try:
        with open(tmp, "w", newline="") as fh:
            write(fh)
        os.replace(tmp, path)
    except OSError as exc:
        for p in (tmp, path):
            try:
                p.unlink()
            except OSError:
                pass
        raise OutputError(f"failed to write {path}: {exc}") from exc


def write_outputs(summary: RunSummary, out_dir: str | os.PathLike, trace: list[str] | None = None) -> list[Path]:
    """Write ``dmr_timeseries.csv``, ``summary.csv`` and, with a trace, ``events.log``."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OutputError(f"cannot create output directory {out}: {exc}") from exc

    def csv_writer(header, rows):
        def write(fh):
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            w.writerows(rows)
        return write

    written = []
    path = out / "dmr_timeseries.csv"
    _write_atomic(path, csv_writer(TIMESERIES_COLUMNS, timeseries_rows(summary)))
    written.append(path)
    path = out / "summary.csv"
    _write_atomic(path, csv_writer(SUMMARY_COLUMNS, summary_rows(summary)))
    written.append(path)
    if trace is not None:
        path = out / "events.log"
        _write_atomic(path, lambda fh: fh.writelines(line + "\n" for line in trace))
        written.append(path)
    return written
