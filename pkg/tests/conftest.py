import dataclasses

import pytest

from wsanqos.config import config_from_dict, default_scenario_path, parse_config
from wsanqos.sim import run_scenario

NODES = [
    {"id": "s1", "role": "source"},
    {"id": "s2", "role": "source"},
    {"id": "s3", "role": "source"},
    {"id": "s4", "role": "source"},
    {"id": "s5", "role": "interferer"},
    {"id": "s6", "role": "relay"},
    {"id": "a1", "role": "actuator"},
    {"id": "a2", "role": "actuator"},
]


def flow(fid, route, managed=True, activation=((0, None),), **kw):
    d = {
        "id": fid,
        "source": route[0],
        "sink": route[-1],
        "route": list(route),
        "managed": managed,
        "activation": [list(a) for a in activation],
    }
    d.update(kw)
    return d


def make_config(flows, duration_s=10, seed=1, manager="none", mac=None, controller=None, nodes=None):
    data = {
        "duration_s": duration_s,
        "seed": seed,
        "manager": manager,
        "nodes": nodes if nodes is not None else NODES,
        "flows": flows,
    }
    if mac:
        data["mac"] = mac
    if controller:
        data["controller"] = controller
    return config_from_dict(data)


def assert_conserved(result):
    for fs in result.summary.flows.values():
        assert fs.released == fs.on_time + fs.missed_expired + fs.missed_dropped, fs.flow
        assert len(result.metrics.ledger[fs.flow]) == fs.released
    assert result.metrics.pending() == 0


@pytest.fixture(scope="session")
def shipped_config():
    return parse_config(default_scenario_path())


@pytest.fixture(scope="session")
def open_loop(shipped_config):
    result = run_scenario(dataclasses.replace(shipped_config, manager="none", seed=1))
    assert_conserved(result)
    return result


@pytest.fixture(scope="session")
def closed_loop(shipped_config):
    result = run_scenario(dataclasses.replace(shipped_config, manager="fuzzy", seed=1))
    assert_conserved(result)
    return result


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import REPORT
    except ImportError:
        return
    if REPORT:
        terminalreporter.section("acceptance criteria")
        for line in REPORT:
            terminalreporter.write_line(line)
