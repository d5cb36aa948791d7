"""Fixed-slope lossy compression of discrete sequences.

The encoder replaces the conditional empirical entropy of the
reconstruction by a linear function of its count matrix, minimises the
result exactly with a Viterbi trellis, and refines the linearisation
coefficients until the reconstruction stops changing.
"""
from ._accel import NUMBA_AVAILABLE, USE_NUMBA
from .cost import (CoeffMatrix, coeffs_from_counts, default_cap, distortion, energy, hamming, linear_cost,
                   load_distortion, scalar_product)
from .empirical import (CountMatrix, EmpiricalDist, check_stationarity, cond_entropy, count_matrix,
                        empirical_dist, entropy_vec)
from .errors import BudgetError, CapacityError, ConfigError
from .lz import lz78_length, lz78_parse, ziv_gap
from .oracle import OracleReport, exhaustive_p1, exhaustive_p2, phi, verify_phi_lemma, verify_theorem1
from .refine import EncodeResult, SlopeSchedule, anneal, iterate_fixed_slope
from .sources import (SourceSpec, fixed_slope_optimum, generate, h_binary, rd_bernoulli, slb_markov)
from .viterbi import edge_weight, viterbi_solve

__version__ = "0.1.0"
