"""
The fuzzy control surface
=========================

Tabulate the scheduler's inference output u over normalised error e and
error change de, and look at its rule activations for one input.
"""

# %%
import numpy as np

from wsanqos import FuzzyInference, fuzzy_infer

grid = np.linspace(-1.0, 1.0, 9)
print("de \\ e " + " ".join(f"{e:>6.2f}" for e in grid))
for de in grid[::-1]:
    print(f"{de:>6.2f} " + " ".join(f"{fuzzy_infer(e, de):>6.3f}" for e in grid))

# %%
# The surface is odd: u(-e, -de) = -u(e, de), and it is zero at the origin,
# so a flow sitting at its setpoint keeps its period.
print(fuzzy_infer(0.3, -0.2), fuzzy_infer(-0.3, 0.2), fuzzy_infer(0.0, 0.0))

# %%
# Strengths of the five output labels (NB, NS, ZE, PS, PB) for one input.
fis = FuzzyInference()
print(fis.firing_strengths(0.6, 0.1))

# %%
# With max aggregation the surface is not monotone in e everywhere. Scan one
# row and report the largest drop as e increases.
row = [fuzzy_infer(e, -0.43) for e in np.linspace(-1, 1, 2001)]
print("largest drop along e at de=-0.43:", max(np.maximum.accumulate(row) - row))
