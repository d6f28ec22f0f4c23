"""Potential theory of sub-Markovian resolvents on finite state spaces.

Resolvents come from a generator ``L`` via ``U_alpha = (alpha I - L)^{-1}``;
a sub-invariant weight ``m`` fixes what "almost everywhere" means.
"""

from .classification import (absorbing_report, absorbing_sets, invariant_function_test, invariant_partition,
                             is_m_irreducible, is_m_recurrent, is_m_transient)
from .dirichlet import build_form, derivation_test, form_equivalence_report, zero_energy_space
from .ergodic import ergodic_projection, harmonic_basis
from .errors import *  # noqa: F401,F403
from .fixtures import fixture
from .invariant_measures import extremality_report, gm_set, invariant_probabilities
from .potential import class_decomposition, potential_kernel, reduced_function
from .process import (inessential_closure, modification_equivalence_report, restriction, strict_classify,
                      trivial_modification)
from .resolvent import (adjoint_generator, cone_membership, duality_residual, excessive_regularize,
                        resolvent_at, validate_generator, weighted_space)

__version__ = "0.1.0"
