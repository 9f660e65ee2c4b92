"""How far is a server that sometimes forgets to grant from one that never does?

Refinement gives a yes/no answer.  The discounted distance turns it into a
number: the first missed grant costs 1, later ones are discounted by lambda.
"""
import os

from qspec import load_spec, make_metric, mc_nu, mr_dmts, refinement_distance, relaxed_membership

HERE = os.path.dirname(os.path.abspath(__file__))
doc = load_spec([os.path.join(HERE, "..", "specs", "grants.qs")])

print("i1 satisfies xnu:", mc_nu(doc["i1"], doc["xnu"]))
print("i2 satisfies xnu:", mc_nu(doc["i2"], doc["xnu"]))
print("xprime refines x:", mr_dmts(doc["xprime"], doc["x"]).holds)

for lam in (0.5, 0.9, 0.99):
    m = make_metric("discounting", lam)
    d, table = refinement_distance(doc["xprime"], doc["x"], m)
    print(f"lambda={lam}: d(xprime, x) = {d:.6f} after {table.rounds} rounds")

m = make_metric("discounting", 0.5)
d = refinement_distance(doc["i2"], doc["x"], m)[0]
print(f"i2 is within {d:.4f} of x;", "member at that budget:", relaxed_membership(doc["i2"], doc["x"], d, m))
