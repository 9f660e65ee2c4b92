"""Synthesize the missing component of a sender.

``s`` is the overall requirement and ``t`` a component we already have.  The
quotient ``s / t`` is the most permissive spec for the rest of the system:
anything refining it, composed with ``t``, meets ``s``.
"""
import os

from qspec import compose, db, load_spec, mr_aa, prune_inconsistent, quotient

HERE = os.path.dirname(os.path.abspath(__file__))
doc = load_spec([os.path.join(HERE, "..", "specs", "sender.qs")])
s, t = doc["s"], doc["t"]

q = quotient(s, t)
print(f"quotient has {len(q.states)} states")
pruned = prune_inconsistent(q)
print(f"{len(pruned.states)} remain after removing inconsistent ones")
print("t || (s/t) refines s:", mr_aa(compose(t, q), db(s)).holds)


# each quotient state records which dividend states it must cover for which divisor states
for state in sorted(pruned.states, key=str):
    print(f"  {state}: {len(pruned.tran[state])} allowed choices")
print("use `qspec quotient --dividend s --divisor t specs/sender.qs` for the full text")
