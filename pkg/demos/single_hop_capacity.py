"""
One flow on an idle channel
===========================

A single 10 ms flow over one hop never misses: the frame plus its ack and
backoff fit comfortably inside the period. Add its neighbour and the channel
starts to show contention.
"""

# %%
import dataclasses

from wsanqos import default_scenario_path, frame_airtime, parse_config, run_scenario

config = parse_config(default_scenario_path())
print("data frame airtime:", frame_airtime(45, config.mac), "us")

alone = dataclasses.replace(config, flows=tuple(f for f in config.flows if f.id == "s1"))
result = run_scenario(alone)
s1 = result.summary.flows["s1"]
print(f"alone: released={s1.released} missed={s1.missed} dmr={s1.avg_dmr}")

# %%
pair = dataclasses.replace(config, flows=tuple(f for f in config.flows if f.id in ("s1", "s2")))
result = run_scenario(pair)
for fid in ("s1", "s2"):
    fs = result.summary.flows[fid]
    print(f"with neighbour: {fid} dmr={fs.avg_dmr:.3f}")
print(result.mac_stats)
