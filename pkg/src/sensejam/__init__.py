"""Covariance design for a monostatic radar whose probing beam doubles as
jamming that enables proactive eavesdropping of an illegal link.

Layering: ``ula`` (array responses) and ``scene`` (channels and SNRs) feed
``fim`` (estimation bounds); ``sdpcore`` solves the convex covariance
programs assembled by ``problems``; ``srocr`` refines relaxed solutions to
rank one; ``cli`` runs experiments and writes CSV tables.
"""

from .ula import UlaGeometry, AngleGrid, steering, steering_derivative, angle_grid
from .scene import (
    ScenarioConfig,
    beampattern,
    channel_ed,
    db_to_linear,
    dbm_to_watts,
    eaves_threshold,
    gamma_d,
    gamma_e,
    interference_free,
    linear_to_db,
    path_gain,
    watts_to_dbm,
)
from .fim import (
    FimBlocks,
    SingularFisher,
    TargetSet,
    crb,
    det_crb,
    fim_blocks,
    fim_oracle,
    fisher_matrix,
    ml_estimate,
    simulate_echo,
)
from .sdpcore import (
    AffineConstraint,
    INFEASIBLE,
    LinearFunctional,
    MAX_ITERATIONS,
    OPTIMAL,
    ObjectiveSpec,
    SolveResult,
    SolverSettings,
    det_inv_value_grad_hess,
    solve,
    validate_solution,
)
from .problems import (
    EavesdropInfeasible,
    MODES,
    Normalizers,
    PipelineOutcome,
    build_joint,
    build_pe_only,
    build_ts_perfect,
    build_ts_robust,
    build_zero_interference,
    compute_normalizers,
    dispatch,
    fim_map_for,
    make_grid,
    run_scheme,
    target_set,
)
from .srocr import (
    RankOneFailure,
    SrocrRecord,
    SrocrSettings,
    extract_beamformer,
    principal_ratio,
    srocr_refine,
)

__version__ = "0.1.0"
