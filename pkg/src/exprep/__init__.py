"""Explanation-guided representations for relation extraction.

Natural-language explanations are interpreted against each input sentence by
a pluggable feature interpreter; the per-explanation vectors are concatenated
into a classifier input alongside interpreted label descriptions. The package
covers the full experiment loop: featurization with a binary cache, a
from-scratch feed-forward trainer, F1 evaluation protocols, ablations, and a
command-line harness.
"""

from .ablations import (AblationPlan, combine_orig_random, cumulative_groups,
                        randomize_explanations, training_vocabulary)
from .cache import FeatureCache
from .client import NliServiceClient
from .config import ExperimentConfig, GridSpec, ProtocolSpec, cache_file
from .data import (Dataset, Explanation, Instance, Label, LabelSpace,
                   load_dataset, load_explanations, load_label_space,
                   save_dataset, save_explanations, subsample_split)
from .errors import (CacheError, ConfigError, DataError, ExprepError,
                     ServiceError, TrainingDiverged)
from .evaluation import (AggregateResult, aggregate_runs, default_metric, f1_binary,
                         f1_micro_excluding_no_relation, tacred_protocol)
from .featurize import FeaturizeStats, featurize_corpus
from .interpreters import (InterpreterSpec, build_interpreter, extract_patterns,
                           hash_interpret, interpret, load_ontology_dictionaries,
                           ontology_interpret, pattern_interpret)
from .mlp import (MlpConfig, adam_step, enumerate_grid, finite_difference_check,
                  forward, init_adam_state, init_params, loss_and_grad, predict)
from .representation import (AssembledRepresentation, Block, SegmentedVector,
                             assemble, assemble_matrix, build_u, build_v)
from .synthetic import make_planted_corpus
from .templating import InstantiatedText, instantiate, premise_text
from .training import (GridSelection, RunResult, TrainOutput, grid_select,
                       load_checkpoint, save_checkpoint, train)

__version__ = "1.0.0"
