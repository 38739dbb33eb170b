"""
Zero participation in a risky asset
===================================

With a risk-free asset and a binary risky asset, an agent holds none of the
risky asset exactly when the weight on the loss equals ``R1/(R0 + R1)``.
Weighting probabilities can therefore keep an agent out of a market with a
positive expected return, whatever the utility.
"""
# %%
import dualrisk as dr

U = dr.PowerUtility(0.5)

# %% Expected utility benchmark: a closed-form interior share
eu = dr.PortfolioProblem(w0=4.0, p0=0.4, R0=1.0, R1=1.5, utility=U, weighting=dr.IdentityWeighting())
print("EU share:", dr.optimal_share(eu))

# %% Prelec weighting at the zero-participation point
h = dr.PrelecWeighting(0.65)
R0, R1 = 1.0, 1.5
p0 = float(h.inverse(dr.zero_participation_weight(R0, R1)))
prob = dr.PortfolioProblem(w0=10.0, p0=p0, R0=R0, R1=R1, utility=U, weighting=h)
print(f"p0={p0:.4f}: expected return {(1 - p0) * R1 - p0 * R0:.3f}, share {dr.optimal_share(prob)}")

# %% Contracting the risky return: how much can the middle return drop
# while zero participation stays optimal?
for eps1 in (0.1, 0.05, 0.025):
    exact = dr.contraction_reduction_exact(prob, eps1)
    approx = dr.contraction_reduction_approx(prob, eps1)
    print(f"eps1={eps1:<6} exact {exact: .6f}  approx {approx: .6f}")
