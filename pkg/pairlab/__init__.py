# SPDX-FileCopyrightText: 2024 pairlab developers
# SPDX-License-Identifier: Apache-2.0
# pylint: disable= wrong-import-position

from .channel import ObservationSet, corrupt, effective_accuracy
from .cutmetrics import alpha_exponents, beta_metric, count_Nk, cut_metrics_report
from .graphs import Graph, GraphModel, degree_stats, edge_expansion, gen_graph, min_cut
from .group import Assignment, GroupSpec, RelationOp, op_apply, relation_matrix, validate_op
from .harness import (
    AlgorithmSpec,
    SweepGrid,
    TrialConfig,
    estimate_threshold,
    predicted_rate,
    run_trials,
    sweep,
)
from .recover import (
    RecoveryResult,
    compatibility_score,
    recover_cycle,
    recover_exhaustive,
    recover_local_search,
    recover_spectral,
    success,
)
from .version import get_version

__version__ = get_version()
