"""Multi-label classifier chains with entropy-based label order discovery.

The toolkit measures pairwise label dependence with conditional entropy,
learns a label dependency network by greedy score search, turns it into a
chain order by topological sorting, and trains/evaluates classifier chains
against binary relevance, random-order chains, and chain ensembles.
"""

__version__ = "0.1.0"

from .chain import (
    BRModel,
    ChainModel,
    EnsembleModel,
    extend_features,
    predict_br,
    predict_br_batch,
    predict_chain,
    predict_chain_batch,
    predict_ecc,
    predict_ecc_batch,
    train_bncc,
    train_br,
    train_chain,
    train_ecc,
)
from .correlation import (
    DependenceMatrix,
    PairDistribution,
    SetDistribution,
    conditional_entropy_pair,
    conditional_entropy_set,
    dependence_degree,
    dependence_degree_set,
    dependence_matrix,
    label_entropy,
)
from .dataset import (
    DataFormatError,
    DatasetStats,
    FoldPlan,
    MultiLabelDataset,
    kfold,
    load_arff,
    load_csv,
    stats,
    subset,
    synth,
    write_csv,
)
from .graph import (
    Edge,
    GraphCycleError,
    WeightedDigraph,
    break_cycles,
    export_dot,
    find_cycle,
    fully_connected_dcg,
    topological_sort,
)
from .learner import LearnerConfig, TrainedBinary, fit, predict, predict_score
from .metrics import (
    CvSummary,
    EvaluationReport,
    cross_validate,
    compare_methods,
    evaluate,
    hamming_loss,
    instance_fscore,
    macro_f,
    micro_f,
)
from .structure import (
    CountTable,
    ParentSets,
    ScoreBreakdown,
    SearchConfig,
    build_order,
    count_configs,
    learn_parent_sets,
    local_score,
    total_score,
)

__all__ = [name for name in dir() if not name.startswith("_")]
