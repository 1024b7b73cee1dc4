"""Finite formula tables, average measures, simple randomizations and
brute-force dividing-line indices with checkable certificates."""

__version__ = "0.1.0"

from .structures import (  # noqa: E402
    FormulaTable,
    Mode,
    TableFormatError,
    gen_halfgraph,
    gen_intervals,
    gen_powerset,
    gen_random,
    load_table,
    parse_generator,
)
from .measures import AverageMeasure, Side, approximate_measure, min_support_oracle, product_measure  # noqa: E402
from .indiscernibles import (  # noqa: E402
    RowArray,
    a_type,
    is_indiscernible,
    is_strongly_indiscernible,
    lemma_shatter_check,
    phi_n_type,
    ramsey_extract,
    ramsey_upper_bound,
)
from .randomization import ProbSpace, RandomElement, bracket_prob, transfer_identity_check  # noqa: E402
from .dividing_lines import (  # noqa: E402
    ladder_index,
    measure_ladder,
    randomized_ladder,
    randomized_vc,
    sop_chain,
    vc_dim,
)
from .bounds import main_theorem_bound, stability_bound, verify_bound  # noqa: E402
