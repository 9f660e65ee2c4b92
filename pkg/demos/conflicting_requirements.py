"""Two requirements that are each nearly met but cannot be met together.

An implementation ``I`` is at pointwise distance 1 from both ``D1`` and ``D2``,
yet their conjunction is unsatisfiable, so the distance to it is infinite.
"""
import os

from qspec import conjoin, is_consistent, load_spec, make_metric, refinement_distance, relaxed_membership, db

HERE = os.path.dirname(os.path.abspath(__file__))
doc = load_spec([os.path.join(HERE, "..", "specs", "conflict.qs")])
pw = make_metric("pointwise")
both = conjoin(doc["D1"], doc["D2"])

for name, spec in (("D1", doc["D1"]), ("D2", doc["D2"]), ("D1 and D2", both)):
    d = refinement_distance(doc["I"], spec, pw)[0]
    print(f"d(I, {name}) = {d}; member with slack 1: {relaxed_membership(doc['I'], spec, 1, pw)}")
# the conjunction is consistent, it just has no a-step that fits both intervals
print("conjunction consistent:", is_consistent(db(both)))
