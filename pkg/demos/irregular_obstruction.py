# coding: utf-8

# # An irregular obstruction on a five-route network
#
# Traffic from O to D can take one of five parallel routes through J and M.
# Route A is the direct one and carries most of the demand. At tick 0 an
# incident message closes most of link J->A1: at most 3 vehicles should be
# on it at once, at walking speed.
#
# We run the same day three ways:
#
# * baseline: no incident at all
# * uncontrolled: the incident happens and nobody reacts
# * controlled: vehicles approaching J ask for access and are either
#   admitted or sent down a lightly loaded alternative
#
# Run from the repository root: `python demos/irregular_obstruction.py`

import numpy as np

from congestion_engine.sim import alternative_spread, five_route_scenario, run_scenario, tail

OBSTRUCTED = ("J", "A1")
CAPACITY = 3


# ## Running the three modes

runs = {}
for mode in ("baseline", "uncontrolled", "controlled"):
    runs[mode] = run_scenario(five_route_scenario(mode=mode, capacity=CAPACITY, seed=0))


# ## Occupancy of the obstructed link
#
# The controller's target is the capacity in the incident message. We look
# at the second half of the run, after the start-up transient.

print(f"occupancy of {OBSTRUCTED[0]}->{OBSTRUCTED[1]} over the last half (capacity {CAPACITY})")
for mode, m in runs.items():
    x = tail(m.occupancy_trace(OBSTRUCTED), 0.5)
    print(f"  {mode:12s} mean {x.mean():6.2f}   p95 {np.percentile(x, 95):5.1f}   max {x.max():3d}")


# Without control the slow link fills up with about a dozen times the
# vehicles it should hold. With control the mean stays under the capacity;
# the occasional overshoot comes from vehicles admitted at J while others
# were still on their way.

# ## How evenly are the detours used?
#
# The balancer sends each denied vehicle to alternative i with probability
# proportional to 1/occupancy. The coefficient of variation across the four
# alternatives tells us how close their loads are.

for mode in ("uncontrolled", "controlled"):
    print(f"  {mode:12s} CV of alternative occupancy {alternative_spread(runs[mode]):.3f}")


# ## Where did the traffic go?

decisions = runs["controlled"].decisions
granted = sum(d[4] for d in decisions)
print(f"{len(decisions)} vehicles were assessed, {granted} admitted")
by_link = {}
for d in decisions:
    if not d[4]:
        by_link[d[6]] = by_link.get(d[6], 0) + 1
for link, n in sorted(by_link.items()):
    print(f"  rerouted via {link}: {n}")


# ## Plotting (optional)
#
# Uncomment to see the occupancy traces side by side.
#
# import matplotlib.pyplot as plt
# for mode, m in runs.items():
#     plt.plot(m.occupancy_trace(OBSTRUCTED), label=mode, lw=0.6)
# plt.axhline(CAPACITY, color="k", ls="--")
# plt.xlabel("tick (s)"); plt.ylabel("vehicles on J->A1"); plt.legend(); plt.show()
