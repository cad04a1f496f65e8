"""QoS managers that adapt sampling periods from measured deadline miss ratios."""

from __future__ import annotations

from dataclasses import dataclass, field

from .fuzzy import FuzzyInference, clamp
from .metrics import DmrSample, Metrics
from .network import Flow


@dataclass(frozen=True)
class ControllerParams:
    setpoint: float = 0.10
    interval_s: float = 1.0
    e_gain: float = 2.0
    de_gain: float = 2.0
    u_gain: float = 0.5

    def validate(self, path: str = "controller") -> list[str]:
        errors = []
        for name in ("setpoint", "interval_s", "e_gain", "de_gain", "u_gain"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                errors.append(f"{path}.{name}: expected a number, got {value!r}")
        if errors:
            return errors
        if not 0.0 < self.setpoint < 1.0:
            errors.append(f"{path}.setpoint: must be in (0, 1), got {self.setpoint}")
        if self.interval_s <= 0:
            errors.append(f"{path}.interval_s: must be > 0, got {self.interval_s}")
        elif round(self.interval_s * 1e6) != self.interval_s * 1e6:
            errors.append(f"{path}.interval_s: must be a whole number of microseconds")
        for name in ("e_gain", "de_gain", "u_gain"):
            if getattr(self, name) <= 0:
                errors.append(f"{path}.{name}: must be > 0")
        if self.u_gain >= 1.0:
            errors.append(f"{path}.u_gain: must be < 1 so periods stay positive")
        return errors

    @property
    def interval_us(self) -> int:
        return int(round(self.interval_s * 1e6))


@dataclass
class FuzzyController:
    params: ControllerParams
    inference: FuzzyInference = field(default_factory=FuzzyInference)
    last_error: float = 0.0
    last_delta: float = 0.0


def controller_tick(flow: Flow, ctrl: FuzzyController, dmr: float) -> int:
    """One feedback step: returns the new period (us) for ``flow``.

    The period is scaled by ``1 + u_gain * delta`` where ``delta`` in [-1, 1]
    comes from fuzzy inference on the normalized error and error change.
    """
    p = ctrl.params
    e = dmr - p.setpoint
    e_norm = clamp(e * p.e_gain)
    de_norm = clamp((e - ctrl.last_error) * p.de_gain)
    delta = ctrl.inference.infer(e_norm, de_norm)
    ctrl.last_error = e
    ctrl.last_delta = delta
    new = int(round(flow.period * (1.0 + p.u_gain * delta)))
    return min(max(new, flow.period_min), flow.period_max)


def null_manager_tick(flow: Flow) -> int:
    return flow.period


class NullManager:
    """Open loop: periods never change."""

    name = "none"

    def __init__(self, params: ControllerParams) -> None:
        self.params = params
        self.samples: list[DmrSample] = []

    def tick(self, flow: Flow, metrics: Metrics, now: int) -> int:
        return null_manager_tick(flow)


class FuzzyManager:
    """One independent fuzzy feedback scheduler per managed flow."""

    name = "fuzzy"

    def __init__(self, params: ControllerParams) -> None:
        self.params = params
        self.controllers: dict[str, FuzzyController] = {}
        self.samples: list[DmrSample] = []

    def tick(self, flow: Flow, metrics: Metrics, now: int) -> int:
        if not flow.managed:
            return flow.period
        ctrl = self.controllers.get(flow.id)
        if ctrl is None:
            ctrl = self.controllers[flow.id] = FuzzyController(self.params)
        window = self.params.interval_us
        # before any release the held value is the setpoint, i.e. no action
        sample = metrics.measure_dmr(flow.id, now - window, now, now, default=self.params.setpoint)
        self.samples.append(sample)
        return controller_tick(flow, ctrl, sample.dmr)


MANAGERS = {"none": NullManager, "fuzzy": FuzzyManager}


def make_manager(name: str, params: ControllerParams):
    try:
        return MANAGERS[name](params)
    except KeyError:
        raise ValueError(f"unknown manager {name!r}; expected one of {sorted(MANAGERS)}") from None
