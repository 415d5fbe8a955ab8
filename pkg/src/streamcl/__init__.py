"""Domain-incremental continual learning for small text classifiers.

Feeds a stream of labelled text domains through a linear softmax head on
deterministic hashed n-gram features, with three update strategies
(plain sequential fine-tuning, episodic-memory rehearsal, and
constraint-projected gradients), and measures forgetting with an
accuracy matrix over all domains after every step.
"""

from streamcl.classifier import (
    LinearModel,
    TrainConfig,
    gradient,
    load_model,
    loss,
    predict,
    predict_many,
    predict_proba,
    save_model,
    sgd_step,
    train_epochs,
)
from streamcl.evaluation import (
    ResultMatrix,
    average_accuracy,
    backward_transfer,
    evaluate_row,
    timeline_accuracy,
    timeline_accuracy_all,
)
from streamcl.featurizer import (
    Example,
    FeaturizerConfig,
    Label,
    apply_ttokens,
    encode_dataset,
    encode_example,
    featurize,
    load_embeddings,
    tokenize,
)
from streamcl.harness import (
    DomainDataset,
    DomainStream,
    ExperimentResult,
    RunConfig,
    RunResult,
    aggregate,
    load_corpus,
    order_stream,
    run_experiment,
    run_single,
    split_domains,
)
from streamcl.memory import EpisodicMemory
from streamcl.reports import emit_reports
from streamcl.strategies import (
    GemConfig,
    Strategy,
    StrategyKind,
    compute_memory_gradients,
    flatten_gradient,
    project_gradient,
    solve_qp_small,
    train_domain,
    train_domain_gem,
    train_domain_naive,
    train_domain_replay,
    unflatten_gradient,
)
from streamcl.synthetic import SyntheticSpec, make_synthetic_stream

__all__ = [
    "Example",
    "FeaturizerConfig",
    "Label",
    "apply_ttokens",
    "encode_dataset",
    "encode_example",
    "featurize",
    "load_embeddings",
    "tokenize",
    "LinearModel",
    "TrainConfig",
    "gradient",
    "load_model",
    "loss",
    "predict",
    "predict_many",
    "predict_proba",
    "save_model",
    "sgd_step",
    "train_epochs",
    "EpisodicMemory",
    "GemConfig",
    "Strategy",
    "StrategyKind",
    "compute_memory_gradients",
    "flatten_gradient",
    "project_gradient",
    "solve_qp_small",
    "train_domain",
    "train_domain_gem",
    "train_domain_naive",
    "train_domain_replay",
    "unflatten_gradient",
    "ResultMatrix",
    "average_accuracy",
    "backward_transfer",
    "evaluate_row",
    "timeline_accuracy",
    "timeline_accuracy_all",
    "DomainDataset",
    "DomainStream",
    "ExperimentResult",
    "RunConfig",
    "RunResult",
    "aggregate",
    "load_corpus",
    "order_stream",
    "run_experiment",
    "run_single",
    "split_domains",
    "SyntheticSpec",
    "make_synthetic_stream",
    "emit_reports",
]
