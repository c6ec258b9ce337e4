"""Model checking of first-order fragments over finite relational structures.

The package covers the algebra of surjective hyper-operations (shops, DSMs,
the canonical shop, 3-permuted forms and completions), formula parsing and
canonical sentences, game-style evaluation with relativisation, the three
core notions, the complexity classifier for every settled fragment including
the four-way classification of positive equality-free logic, the
hardness gadgets with their
reductions, and a census of the DSM lattice on small domains.
"""

from .classifier import (Verdict, boolean_schaefer, classify_fragment,
                         classify_pos_eqfree)
from .cores import UXCore, classical_core, eqfree_core, ux_core
from .errors import (BudgetExceededError, FomcError, FormulaError, ParseError,
                     SignatureMismatchError)
from .evaluator import (EvalTrace, check_relativisation, contained_in,
                        enumerate_sentences, evaluate, evaluate_with_trace,
                        replay_trace, sample_sentence)
from .formulas import (And, Bottom, Eq, Formula, FragmentKey, Not, Or, Quant,
                       Rel, Top, canonical_sentence, defining_formula,
                       dualize, fragment_of, parse_formula, relativise,
                       render_formula, sim_formula, to_nnf)
from .gadgets import (GadgetSpec, make_gadget, meta_reduction,
                      reduce_nae_to_k2, reduce_qcsp_nae_to_gadget)
from .lattice import (all_shops, dsm_complexity_tag, enumerate_dsms,
                      export_lattice)
from .shops import (DSM, HyperMap, canonical_shop, check_3_permuted,
                    completion_contains, completion_generators, compose,
                    enumerate_she, exists_shop, generate_dsm, identity_shop,
                    inverse, is_sub_shop, parse_shop, preserves, render_shop,
                    shop_from_sets)
from .structures import (BooleanOperationTable, Signature, Structure,
                         are_isomorphic, closed_under_operation, complement,
                         disjoint_union, find_morphism, induced_substructure,
                         parse_structure, quotient_by_sim, render_structure)

__version__ = "0.1.0"
