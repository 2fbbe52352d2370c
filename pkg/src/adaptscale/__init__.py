"""adaptscale: adaptive-VQE iteration-scaling study toolkit.

Pipeline: FCIDUMP -> Jordan-Wigner qubit Hamiltonian -> exact-statevector
ADAPT-VQE (Qubit/QEB/CEO pools, TETRIS, BFGS with Hessian recycling) ->
determinant-basis FCI references and CI distributions -> Renyi-entropy
complexity metrics -> log-linear scaling fits with confidence bands and
circuit-resource budgets.
"""

__version__ = "0.1.0"

from .adapt import (
    AdaptConfig,
    AdaptTrace,
    EPSILON_CHEM,
    IterationRecord,
    OptimizationStall,
    expand_inverse_hessian,
    inner_vqe,
    run_adapt,
    select_operators,
)
from .analysis import (
    Interval,
    PredictionResult,
    R2Surface,
    ResourceEstimate,
    ScalingFit,
    SurfaceSource,
    fit_loglinear,
    linear_rate_fit,
    predict_n_adapt,
    r2_surface,
    resource_budget,
    solve_for_threshold,
)
from .complexity import ALPHA_STAR, RenyiLimits, RenyiResult, renyi_curve, renyi_entropy, renyi_limits
from .exact import (
    CiDistribution,
    CiVector,
    SectorSpec,
    ci_distribution,
    determinant_count,
    fci_ground_state,
    hartree_fock_energy,
    reference_occupation,
    spin_squared_ci,
)
from .hamio import MolecularProblem, ParseError, parse_fcidump, write_fcidump
from .pauli import PauliTerm, QubitHamiltonian, jordan_wigner, pauli_product, simplify
from .pools import (
    CostTable,
    DEFAULT_COST_TABLE,
    OperatorPool,
    PoolOperator,
    build_ceo_pool,
    build_pool,
    build_qeb_pool,
    build_qubit_pool,
    cnot_cost,
    random_subpool,
)
from .simulator import (
    AnsatzState,
    CompiledOperator,
    Statevector,
    apply_generator_exponential,
    expectation,
    pool_gradients,
    prepare_ansatz_state,
    prepare_reference,
    spin_squared,
)
