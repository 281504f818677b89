"""Multi-objective association rule mining with NSGA-III and MOEA/D."""

from .dataset import (
    TransactionDatabase,
    from_matrix,
    from_rows,
    generate_synthetic,
    load_transactions,
    support_count,
)
from .moead import MoeadParams, MoeadTrace, pbi_scalar, run_moead
from .nsga3 import Nsga3Params, RunOutput, das_dennis, nsga3_select, run_nsga3
from .oracle import enumerate_rules, exact_pareto_front, naive_evaluate
from .pareto import fast_nondominated_sort
from .quality import (
    FrontApproximation,
    approximate_true_front,
    hv_igd_ratio,
    hypervolume_3d,
    igd,
)
from .rules import (
    ABSENT,
    ANTECEDENT,
    CONSEQUENT,
    Rule,
    RuleMetrics,
    decode_bits,
    encode_bits,
    evaluate_rule,
    objective_vector,
)
from .variation import VariationParams, crossover, dedup, mutate, random_rule, repair, transaction_seeded_rule

__version__ = "0.1.0"
