"""fibcheck: a computational engine for finite split fibrations.

Builds the simple coproduct (Sum), simple product (Prod) and Dialectica
(Dial = Sum∘Prod) completions with explicit formulas, classifies fibrations
(Skolem / Goedel / extendable) by exhaustive universal-property checking,
and recognizes Dialectica instances constructively.
"""

__version__ = "0.1.0"

from .cat import (FinCategory, LazyCategory, ChosenStructure, Functor,
                  check_category_laws, classify_base, canonical_map,
                  iso_search)
from .fibration import (IndexedFibration, TotalCategory, build_total,
                        cartesian_lift, check_split, opposite_fibration,
                        fibre_structure_report, total_product)
from .adjunctions import (AdjunctionData, WeakAdjunctionData, BCCSquare,
                          find_adjoint, verify_adjunction,
                          verify_weak_adjunction, adjoint_from_extensivity)
from .completions import (sum_completion, prod_completion, dial_completion,
                          sum_simple_coproduct, sum_simple_product,
                          sum_fibred_products, sum_fibred_coproducts,
                          sum_injection_weak_adjoints, total_weak_coproduct,
                          total_weak_product)
from .qf import (is_qf, QfAnalysis, classify_fibration, prenex_decompose,
                 verify_skolemization, reconstruct_from_qf,
                 recognize_dialectica, factor_fibre_arrow)
from .models import builtin_fibration, random_fibration
