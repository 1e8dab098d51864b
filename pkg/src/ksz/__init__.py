"""Unimodular multilinear forms with small norm, built from Hadamard matrices.

Submodules: ``hadamard`` (constructions and the order registry), ``forms``
(chained forms and the construction pipeline), ``norms`` (certificates and
closed-form bounds), ``berlekamp`` (the switching game) and ``cli``.
"""
from ._engine import BACKEND, available_backends
from .berlekamp import (GameConfig, GameResult, SwitchAssignment, brute_oracle, hadamard_game_report,
                        imbalance_exact, imbalance_heuristic, on_lights, r_from_g, worst_case)
from .errors import (BudgetExceededError, ConvergenceError, InvariantError, KSZError, NotHadamardError,
                     RegistryExhaustedError, UnsupportedPatternError)
from .forms import (BoundReport, ChainedForm, FormSpec, chained_form, construct_ksz, lp_scale_witness,
                    read_pmt, truncate_embed, write_pmt)
from .hadamard import (Mode, OrderRegistry, SignMatrix, base_matrix, consecutive_ratios, kronecker,
                       nearest_order, paley_one, read_pm1, registry_orders, sylvester_double,
                       verify_hadamard, write_pm1)
from .norms import (CertKind, NormCertificate, basis_lower_bound, constants_table, l2_spectral,
                    linf_exact, linf_heuristic)

__version__ = "0.1.0"
