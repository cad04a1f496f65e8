"""
Open loop versus fuzzy feedback
===============================

Run the shipped eight-node scenario twice with the same seed: once with the
open-loop manager, which never touches a period, and once with the fuzzy
feedback scheduler. Then walk through the per-second deadline miss ratio.
"""

# %%
# Load the scenario. Both runs use the same seed and the same random stream,
# so they are identical until the first controller tick at t = 1 s.
import dataclasses

from wsanqos import default_scenario_path, parse_config, run_scenario

config = parse_config(default_scenario_path())
print(config.description)

open_loop = run_scenario(dataclasses.replace(config, manager="none"))
closed_loop = run_scenario(dataclasses.replace(config, manager="fuzzy"))

# %%
# Average deadline miss ratio per managed flow. s1 and s2 share the channel
# with the interferer between 20 and 40 s. s3 and s4 join at 60 s and go
# through the relay s6, so every packet crosses the channel twice.
print(f"{'flow':<6}{'open':>8}{'fuzzy':>8}")
for fid in ("s1", "s2", "s3", "s4"):
    a = open_loop.summary.flows[fid].avg_dmr
    b = closed_loop.summary.flows[fid].avg_dmr
    print(f"{fid:<6}{a:>8.3f}{b:>8.3f}")

# %%
# A coarse strip chart of s1, one character per second: ' ' for no misses,
# rising to '#' for a window that missed half or more of its deadlines.
import math

def strip(windows):
    levels = " .:-=+*#"
    return "".join(
        "_" if not w.released else levels[min(7, math.ceil(w.dmr * 14))]
        for w in windows
    )

for name, result in (("open ", open_loop), ("fuzzy", closed_loop)):
    print(name, strip(result.summary.flows["s1"].windows))

# %%
# The scheduler trades rate for timeliness. Here is where each period ended up.
for fid in ("s1", "s2", "s3", "s4"):
    print(fid, f"{closed_loop.summary.flows[fid].final_period / 1000:.3f} ms")
