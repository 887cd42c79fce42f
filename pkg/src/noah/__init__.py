"""NoAH: attributed hypergraph generation with core/fringe attachment."""
from .baseline import hypercl_generate
from .fit import (
    FitConfig,
    FitTrace,
    ParamLogits,
    core_likelihood,
    expected_cardinalities,
    expected_degrees,
    fit,
    fringe_likelihood,
    loss_gradients,
    sorted_mse,
    total_loss,
)
from .generator import (
    NoahParams,
    core_attach_prob,
    fringe_attach_prob,
    generate,
    generate_hyperedge,
    mix_core_attributes,
)
from .hgraph import (
    AttributedHypergraph,
    RawAttributeTable,
    binarize_attributes,
    degree_vector,
    load_hypergraph,
    size_vector,
    write_hypergraph,
)
from .metrics import (
    MetricReport,
    affinity_ratio,
    affinity_score,
    baseline_score,
    higher_order_hyperedge_entropy,
    hyperedge_entropy,
    interplay_discrepancy,
    node_homophily,
    structural_report,
    wasserstein1,
)
from .partition import CoreFringePartition, minimal_hitting_set, umhs_partition

__version__ = "0.1.0"
