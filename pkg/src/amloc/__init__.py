"""Alternating-minimization solvers for range-based sensor network
localization: centralized, clustered and fully distributed variants of one
exact block-minimization scheme, an accelerated-gradient warm start,
clustering constructions, evaluation metrics and an experiment runner.
"""

from .clustering import (Clustering, colored_clusters, geographical_clusters,
                         singleton_clusters, whole_cluster)
from .errors import (AmlocError, ConnectivityError, DisconnectedError,
                     FactorizationError, MissingTruthError, ParseError,
                     SingularFIMError, SubFactorizationError,
                     UnreachableError)
from .experiment import (ExperimentConfig, MethodSpec, emit_plotdata,
                         load_config, parse_method, run_experiment)
from .generate import (GenSpec, PRESETS, Realization, generate_connected,
                       generate_topology, iter_realizations, preset,
                       sample_noise)
from .instance_io import read_clustering, read_instance, write_instance
from .matrices import ProblemMatrices, SpdFactor, build_matrices, spd_solve
from .metrics import (MessageLedger, RunReport, bias_estimate, crlb_root,
                      fisher_information, message_accounting, rmse,
                      rmse_per_sensor, write_aggregate_csv,
                      write_plotdata_csv)
from .network import EdgeOrdering, Network, components, connected
from .solver import (CriticalityReport, RunTrace, SolverConfig, SolverState,
                     ag_warmstart, am_sweep, criticality_report,
                     lipschitz_bound, localization_objective, run,
                     surrogate_objective, surrogate_objective_matrix,
                     update_u, update_x_centralized, update_x_cluster,
                     update_x_sensor)

__version__ = "0.1.0"
