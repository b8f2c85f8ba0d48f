"""testrank: pick the best generated code solution by execution agreement.

Pipeline: execute candidate solutions against generated tests, group
solutions into consensus sets by identical pass vectors, score sets as
|S|^alpha * |T|^beta, rank with a seeded genetic algorithm, and report
pass@k (unbiased baseline and ranked top-k).
"""

from .consensus import ConsensusSet, group_exhaustive, group_ransac
from .errors import DataError, RunnerError, TestrankError
from .evorank import (GaConfig, RankedSelection, fitness, rank, score_set,
                      select_top_k)
from .harness import HarnessConfig, execute_matrix, warm_cache
from .kernels import BACKEND as KERNEL_BACKEND
from .metrics import (CorrectnessVector, Method, PassAtKReport, build_report,
                      pass_at_k_ranked, pass_at_k_unbiased, tune)
from .model import (CandidateSolution, Corpus, ExecutionMatrix, Outcome,
                    Problem, ScoreParams, Status, TestCase, load_corpus)
from .synth import SynthSpec, SynthTruth, generate

__version__ = "0.1.0"
