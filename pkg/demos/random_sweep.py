"""Run every equivalence harness over random instances and tally the outcomes."""

import sys
import time

import numpy as np

from potlab.classification import is_m_irreducible, is_m_recurrent, is_m_transient
from potlab.dirichlet import form_equivalence_report
from potlab.invariant_measures import extremality_report
from potlab.oracles import random_instance
from potlab.process import modification_equivalence_report

count = int(sys.argv[1]) if len(sys.argv) > 1 else 100
rng = np.random.default_rng(0)
tally = {"transient": 0, "recurrent": 0, "irreducible": 0, "degenerate": 0, "inconsistent": 0}
t0 = time.perf_counter()
for _ in range(count):
    gen, w = random_instance(rng)
    t = is_m_transient(gen, w)
    r = is_m_recurrent(gen, w)
    irr, irep = is_m_irreducible(gen, w, transient=t.verdict, recurrent=r.verdict)
    reps = [t, r, irep, extremality_report(gen, w, irreducible=irr, recurrent=r.verdict),
            form_equivalence_report(gen, w),
            modification_equivalence_report(gen, w, t.verdict, r.verdict, irr)]
    tally["transient"] += t.verdict
    tally["recurrent"] += r.verdict
    tally["irreducible"] += irr
    tally["degenerate"] += len(w.support) < gen.n
    tally["inconsistent"] += sum(not rep.consistent for rep in reps)
print(f"{count} instances in {time.perf_counter() - t0:.1f}s")
for k, v in tally.items():
    print(f"  {k:12s} {v}")
