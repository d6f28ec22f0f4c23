"""R3: a measure that is recurrent but not extremal, and its split into two invariant laws."""

from potlab.fixtures import fixture
from potlab.invariant_measures import extremality_report, gm_set

gen, w = fixture("R3")
rep = extremality_report(gen, w)
for key, value in rep.verdicts.items():
    print(f"{key:12s} {value}")
alpha, mu1, mu2 = rep.witnesses["T2.26.iii"]
print(f"m = {alpha} * {mu1} + {1 - alpha} * {mu2}")
print("consistent:", rep.consistent)
print("extreme measures of the set dominated by m:", gm_set(gen, w).extreme_measures(w.m))
