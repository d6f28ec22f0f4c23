"""Walk through the two-state chain C2: classification, projection, reduced functions, form."""

import numpy as np

from potlab.classification import is_m_irreducible, is_m_recurrent, is_m_transient
from potlab.dirichlet import build_form
from potlab.ergodic import convergence_profile, ergodic_projection
from potlab.fixtures import fixture
from potlab.potential import reduced_function

gen, w = fixture("C2")
print("generator\n", gen.L)
print("transient:", is_m_transient(gen, w).verdict, " recurrent:", is_m_recurrent(gen, w).verdict,
      " irreducible:", is_m_irreducible(gen, w)[0])

u = np.array([1.0, 0.0])
print("ergodic projection of (1, 0):", ergodic_projection(gen, w, u))
alphas, err, C = convergence_profile(gen, w, u)
for a, e in zip(alphas, err):
    print(f"  alpha={a:.0e}  |alpha U_alpha u - Pi u| = {e:.3e}")
print("fitted rate constant C =", C)

for beta in (0.0, 1.0, 10.0):
    print(f"reduced function of (1, 0) at beta={beta}:", reduced_function(gen, u, beta))

form = build_form(gen, w)
print("energy matrix\n", form.E_matrix, "\nsector constant", form.sector_k)
