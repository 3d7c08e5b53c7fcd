"""Output-sensitive enumeration of projected acyclic join queries.

Enumerators are generator programs driven by a virtual tick clock, so delay
is measured in abstract operations rather than wall-clock time.
"""
from .core import (
    ConfigurationError,
    DelayReport,
    InterleavePlan,
    PausableEnumerator,
    dedup_interleave,
    drain,
    interleave_union,
    measure_delay,
    merge_sorted,
)
from .dynamic import SelfJoinIndex, enum_selfjoin_star, selfjoin_delete, selfjoin_insert
from .fmm import BoolMatrix, FmmPlan, bool_matmul, enum_fmm, preprocess_fmm
from .leftdeep import LeftDeepQuery, enum_leftdeep, per_u_cartesian, prepare_leftdeep
from .oracle import oracle_project_join
from .path import PathQuery, SuffixViewStore, enum_path, prepare_path, preprocess_path
from .relation import (
    DomainMap,
    Relation,
    compress_domain,
    compute_full_join_size,
    count_sort_by_degree,
    find_split_index,
    full_reducer,
    load_csv,
)
from .star import (
    HeavyLightPartition,
    StarQuery,
    enum_one_valuation,
    enum_star,
    enum_star_alternate,
    enum_two_path,
    prepare_star,
)

__version__ = "0.1.0"
