"""A vending machine whose specification talks about beverages in general.

The implementation-side specification ``t`` offers coffee, tea and beer; ``s``
only promises some beverage.  Whether ``t`` refines ``s`` hinges on the label
order: drop the fact that beer is a beverage and the check fails.
"""
import os

from qspec import load_spec, parse_spec, refines, tr_oracle

HERE = os.path.dirname(os.path.abspath(__file__))
SPEC = os.path.join(HERE, "..", "specs", "vending.qs")

doc = load_spec([SPEC])
print("t refines s:", refines(doc["t"], doc["s"]).holds)

with open(SPEC) as fh:
    text = fh.read()
weaker = parse_spec(text.replace(", beer <= beverage", ""))
result = refines(weaker["t"], weaker["s"])
print("without 'beer <= beverage':", result.holds)
(pair, why) = result.failure
print("  first failing pair:", pair, "-", why)

# the bounded implementation check agrees on small machines
print("every implementation with a single state of t is one of s:",
      tr_oracle(doc["t"], doc["s"], 1).holds)
