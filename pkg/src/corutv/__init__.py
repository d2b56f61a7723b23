"""Randomized rank-revealing UTV factorization (CoR-UTV), reference
low-rank baselines and a robust PCA solver built on them."""

from .matcore import (
    ConvergenceWarning,
    ParameterError,
    QrcpFactors,
    QrFactors,
    RngSeed,
    ShapeError,
    SvdFactors,
    Xoshiro256pp,
    gaussian,
    householder_qr,
    jacobi_svd,
    matmul,
    norm,
    pinv,
    qrcp,
    svd,
)
from .utv import (
    BoundReport,
    ConditioningWarning,
    FlopModel,
    UtvApprox,
    bound_report,
    cor_shrink,
    cor_threshold,
    corutv,
    flop_estimate,
    singular_estimates,
    truncate_rank_k,
)
from .baselines import qrcp_rank_k, sor_svd, svd_rank_k, tsr_svd, tsr_svd_rank_k
from .rpca import RpcaConfig, RpcaResult, alm_rpca, predict_rank, shrink, support_match, svt
from .testgen import (
    TestMatrixSpec,
    gen_fast_decay,
    gen_noisy_lowrank,
    gen_rpca_instance,
    generate,
)

__version__ = "0.1.0"
