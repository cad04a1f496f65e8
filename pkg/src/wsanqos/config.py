"""Scenario configuration: JSON parsing, validation and serialization."""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .engine import MASK64
from .mac import MacParams
from .network import ROLES
from .qos import MANAGERS, ControllerParams


class ConfigError(ValueError):
    """Invalid scenario; ``errors`` lists every problem found, with field paths."""

    def __init__(self, errors: list[str]) -> None:
        self.errors = list(errors)
        super().__init__("invalid scenario:\n  " + "\n  ".join(self.errors))


@dataclass(frozen=True)
class NodeSpec:
    id: str
    role: str


@dataclass(frozen=True)
class FlowSpec:
    id: str
    source: str
    sink: str
    route: tuple[str, ...]
    period_ms: float = 10.0
    period_min_ms: float = 10.0
    period_max_ms: float = 500.0
    managed: bool = True
    size_bytes: int = 45
    # (on_s, off_s); off_s None means "until the run ends"
    activation: tuple[tuple[float, float | None], ...] = ((0.0, None),)


@dataclass(frozen=True)
class ScenarioConfig:
    nodes: tuple[NodeSpec, ...]
    flows: tuple[FlowSpec, ...]
    duration_s: float = 100.0
    seed: int = 1
    manager: str = "none"
    mac: MacParams = field(default_factory=MacParams)
    controller: ControllerParams = field(default_factory=ControllerParams)
    description: str = ""

    def replace(self, **changes) -> ScenarioConfig:
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict[str, Any]:
        return {
            "description": self.description,
            "duration_s": self.duration_s,
            "seed": self.seed,
            "manager": self.manager,
            "nodes": [{"id": n.id, "role": n.role} for n in self.nodes],
            "flows": [
                {
                    "id": f.id,
                    "source": f.source,
                    "sink": f.sink,
                    "route": list(f.route),
                    "period_ms": f.period_ms,
                    "period_min_ms": f.period_min_ms,
                    "period_max_ms": f.period_max_ms,
                    "managed": f.managed,
                    "size_bytes": f.size_bytes,
                    "activation": [[on, off] for on, off in f.activation],
                }
                for f in self.flows
            ],
            "mac": dataclasses.asdict(self.mac),
            "controller": dataclasses.asdict(self.controller),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def digest(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]


def _is_number(x: Any) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool)


class _Reader:
    """Collects errors while pulling typed fields out of plain dicts."""

    def __init__(self) -> None:
        self.errors: list[str] = []

    def check_keys(self, obj: Any, allowed: set[str], required: set[str], path: str) -> bool:
        if not isinstance(obj, dict):
            self.errors.append(f"{path}: expected an object, got {type(obj).__name__}")
            return False
        for key in sorted(set(obj) - allowed):
            self.errors.append(f"{path}.{key}: unknown key")
        for key in sorted(required - set(obj)):
            self.errors.append(f"{path}.{key}: missing required key")
        return True

    def get(self, obj: dict, key: str, default: Any, kind: str, path: str) -> Any:
        if key not in obj:
            return default
        value = obj[key]
        ok = {
            "str": isinstance(value, str),
            "bool": isinstance(value, bool),
            "int": isinstance(value, int) and not isinstance(value, bool),
            "number": _is_number(value),
        }[kind]
        if not ok:
            self.errors.append(f"{path}.{key}: expected {kind}, got {value!r}")
            return default
        return value


def _mac_from_dict(r: _Reader, obj: Any, path: str) -> MacParams:
    names = {f.name for f in dataclasses.fields(MacParams)}
    if obj is None:
        return MacParams()
    if not r.check_keys(obj, names, set(), path):
        return MacParams()
    kwargs = {}
    for f in dataclasses.fields(MacParams):
        if f.name in obj:
            kwargs[f.name] = obj[f.name]
    params = MacParams(**kwargs)
    r.errors.extend(params.validate(path))
    return params


def _controller_from_dict(r: _Reader, obj: Any, path: str) -> ControllerParams:
    names = {f.name for f in dataclasses.fields(ControllerParams)}
    if obj is None:
        return ControllerParams()
    if not r.check_keys(obj, names, set(), path):
        return ControllerParams()
    params = ControllerParams(**{k: obj[k] for k in names if k in obj})
    r.errors.extend(params.validate(path))
    return params


def _activation_from(r: _Reader, raw: Any, path: str) -> tuple[tuple[float, float | None], ...]:
    if not isinstance(raw, list) or not raw:
        r.errors.append(f"{path}: expected a non-empty list of [on_s, off_s] pairs")
        return ((0.0, None),)
    out = []
    for i, pair in enumerate(raw):
        p = f"{path}[{i}]"
        if not (isinstance(pair, list) and len(pair) == 2):
            r.errors.append(f"{p}: expected [on_s, off_s]")
            continue
        on, off = pair
        if not _is_number(on) or (off is not None and not _is_number(off)):
            r.errors.append(f"{p}: on/off must be numbers (off may be null)")
            continue
        if on < 0:
            r.errors.append(f"{p}: on time must be >= 0")
        if off is not None and off <= on:
            r.errors.append(f"{p}: off time {off} is not after on time {on}")
        out.append((on, off))
    for i in range(1, len(out)):
        prev_on, prev_off = out[i - 1]
        on, _ = out[i]
        if prev_off is None or on < prev_off:
            r.errors.append(f"{path}[{i}]: intervals must be ordered and non-overlapping")
    return tuple(out)


_FLOW_KEYS = {
    "id", "source", "sink", "route", "period_ms", "period_min_ms", "period_max_ms",
    "managed", "size_bytes", "activation",
}
_TOP_KEYS = {"description", "duration_s", "seed", "manager", "nodes", "flows", "mac", "controller"}


def config_from_dict(data: Any) -> ScenarioConfig:
    r = _Reader()
    if not r.check_keys(data, _TOP_KEYS, {"nodes", "flows"}, "config"):
        raise ConfigError(r.errors)

    nodes = []
    raw_nodes = data.get("nodes", [])
    if not isinstance(raw_nodes, list):
        r.errors.append("config.nodes: expected a list")
        raw_nodes = []
    for i, raw in enumerate(raw_nodes):
        path = f"nodes[{i}]"
        if not r.check_keys(raw, {"id", "role"}, {"id", "role"}, path):
            continue
        node_id = r.get(raw, "id", "", "str", path)
        role = r.get(raw, "role", "", "str", path)
        if role and role not in ROLES:
            r.errors.append(f"{path}.role: {role!r} is not one of {list(ROLES)}")
        nodes.append(NodeSpec(node_id, role))

    flows = []
    raw_flows = data.get("flows", [])
    if not isinstance(raw_flows, list):
        r.errors.append("config.flows: expected a list")
        raw_flows = []
    for i, raw in enumerate(raw_flows):
        path = f"flows[{i}]"
        if not r.check_keys(raw, _FLOW_KEYS, {"id", "source", "sink", "route"}, path):
            continue
        route = raw.get("route", [])
        if not (isinstance(route, list) and all(isinstance(h, str) for h in route)):
            r.errors.append(f"{path}.route: expected a list of node ids")
            route = []
        flows.append(FlowSpec(
            id=r.get(raw, "id", "", "str", path),
            source=r.get(raw, "source", "", "str", path),
            sink=r.get(raw, "sink", "", "str", path),
            route=tuple(route),
            period_ms=r.get(raw, "period_ms", 10.0, "number", path),
            period_min_ms=r.get(raw, "period_min_ms", 10.0, "number", path),
            period_max_ms=r.get(raw, "period_max_ms", 500.0, "number", path),
            managed=r.get(raw, "managed", True, "bool", path),
            size_bytes=r.get(raw, "size_bytes", 45, "int", path),
            activation=_activation_from(r, raw.get("activation", [[0.0, None]]), f"{path}.activation"),
        ))

    config = ScenarioConfig(
        nodes=tuple(nodes),
        flows=tuple(flows),
        duration_s=r.get(data, "duration_s", 100.0, "number", "config"),
        seed=r.get(data, "seed", 1, "int", "config"),
        manager=r.get(data, "manager", "none", "str", "config"),
        mac=_mac_from_dict(r, data.get("mac"), "mac"),
        controller=_controller_from_dict(r, data.get("controller"), "controller"),
        description=r.get(data, "description", "", "str", "config"),
    )
    r.errors.extend(validate(config))
    if r.errors:
        raise ConfigError(r.errors)
    return config


def validate(config: ScenarioConfig) -> list[str]:
    """Semantic checks on an already well-typed config."""
    errors = []
    if config.duration_s <= 0:
        errors.append(f"config.duration_s: must be > 0, got {config.duration_s}")
    if not 0 <= config.seed <= MASK64:
        errors.append("config.seed: must be a 64-bit unsigned integer")
    if config.manager not in MANAGERS:
        errors.append(f"config.manager: {config.manager!r} is not one of {sorted(MANAGERS)}")

    roles = {}
    for i, n in enumerate(config.nodes):
        if not n.id:
            errors.append(f"nodes[{i}].id: must be non-empty")
        elif n.id in roles:
            errors.append(f"nodes[{i}].id: duplicate node id {n.id!r}")
        roles[n.id] = n.role

    seen_flows, seen_sources = set(), set()
    for i, f in enumerate(config.flows):
        path = f"flows[{i}]"
        if not f.id:
            errors.append(f"{path}.id: must be non-empty")
        elif f.id in seen_flows:
            errors.append(f"{path}.id: duplicate flow id {f.id!r}")
        seen_flows.add(f.id)
        for key in ("source", "sink"):
            name = getattr(f, key)
            if name not in roles:
                errors.append(f"{path}.{key}: undeclared node {name!r}")
        if f.source in seen_sources:
            errors.append(f"{path}.source: node {f.source!r} already sources another flow")
        seen_sources.add(f.source)
        if len(f.route) < 2:
            errors.append(f"{path}.route: needs at least source and sink")
        else:
            for j, hop in enumerate(f.route):
                if hop not in roles:
                    errors.append(f"{path}.route[{j}]: undeclared node {hop!r}")
            if f.route[0] != f.source:
                errors.append(f"{path}.route[0]: must be the source {f.source!r}")
            if f.route[-1] != f.sink:
                errors.append(f"{path}.route[-1]: must be the sink {f.sink!r}")
            if len(set(f.route)) != len(f.route):
                errors.append(f"{path}.route: repeats a node")
        if f.period_min_ms <= 0:
            errors.append(f"{path}.period_min_ms: must be > 0, got {f.period_min_ms}")
        if f.period_max_ms < f.period_min_ms:
            errors.append(f"{path}.period_max_ms: must be >= period_min_ms")
        if not f.period_min_ms <= f.period_ms <= f.period_max_ms:
            errors.append(f"{path}.period_ms: {f.period_ms} outside [period_min_ms, period_max_ms]")
        if f.size_bytes <= 0:
            errors.append(f"{path}.size_bytes: must be > 0")
        if roles.get(f.source) == "interferer" and f.managed:
            errors.append(f"{path}.managed: interferer flows cannot be managed")
    return errors


def parse_config(path: str | Path) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError([f"{path}: cannot read scenario file: {exc.strerror}"]) from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([f"{path}: invalid JSON: {exc}"]) from exc
    return config_from_dict(data)


def default_scenario_path() -> Path:
    return Path(__file__).parent / "scenarios" / "paper_5_1.json"
