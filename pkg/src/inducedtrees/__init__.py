"""Induced trees in random graphs.

Samplers and an exact/randomized induced-embedding search, paired with
log-space evaluations of the second-moment bound for a fixed bounded-degree
tree appearing as an induced subgraph of G(n, p).
"""

from .graph import (
    Embedding,
    Forest,
    Graph,
    Tree,
    caterpillar_tree,
    check_embedding,
    forest_gadget_tree,
    full_tree,
    induced_subgraph,
    is_induced_copy,
    path_tree,
    random_tree_bounded,
    sample_gnp,
    sample_planted,
    star_tree,
    tree_automorphism_count,
)
from .logreal import LogReal
from .moments import (
    MomentParams,
    chebyshev_bound,
    degree_constant,
    expected_count,
    f_value,
    g_value,
    h_tilde,
    k_max,
    s_bound,
    threshold_size,
)
from .overlap import OverlapProfile, conditional_embedding_probability, exact_S, overlap_profile
from .rng import Seed
from .search import (
    MaxFamily,
    SearchBudget,
    count_ordered_embeddings,
    find_induced_embedding,
    max_induced_size,
)

__version__ = "0.1.0"
