"""
Comparing two agents
====================

Agent 2 is more risk averse than agent 1 when both its local indices are
larger everywhere. On finite grids this is checked alongside three
equivalent formulations: larger premia on every query, concave transforms
between the two agents' functions, and an ordering of cross ratios.
"""
# %%
import dualrisk as dr
from dualrisk.comparative import DEFAULT_P_GRID, wealth_grid

W = wealth_grid(1.0, 20.0)
queries = dr.sample_queries(500, (1.0, 20.0), seed=0)

# %% A clear case: more concave utility and more concave weighting
a1 = dr.Agent(dr.PowerUtility(0.8), dr.QuadraticWeighting(0.1), "mild")
a2 = dr.Agent(dr.PowerUtility(0.3), dr.QuadraticWeighting(0.6), "strong")
report = dr.proposition1_report(a1, a2, W, DEFAULT_P_GRID, queries)
for name in ("condition_i", "condition_ii", "condition_iv", "condition_v"):
    c = getattr(report, name)
    print(f"{name:13} holds={c.holds!s:5} gap={c.gap: .4f}")

# %% Prelec agents with different curvature are not ordered: the weighting
# indices cross, so every condition fails together
b1 = dr.Agent(dr.PowerUtility(0.5), dr.PrelecWeighting(0.65))
b2 = dr.Agent(dr.PowerUtility(0.5), dr.PrelecWeighting(0.3))
report = dr.proposition1_report(b1, b2, W, DEFAULT_P_GRID, queries)
print("all agree:", report.agree, " (i) holds:", report.condition_i.holds)
print("witness of the failure:", report.condition_ii.witness)
