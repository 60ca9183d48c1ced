"""Dense numerical laboratory for Lindblad generators and quantum detailed balance.

Modules:
    operators: matrix functions, Schatten norms, column-stacking vectorization.
    gibbs: Gibbs states, weighted inner products, identification maps.
    lindblad: generators on states and observables, dissipation function.
    qdb: synthesis of detailed-balanced jump operators and its verification.
    dynamics: exact, Trotter and split evolution, unravelling, Choi matrices.
    spectral: adjoints, kernels, commutants, gaps and convergence checks.
    modular: cyclic vector, modular generator and conjugation.
"""
from .dynamics import (
    choi_matrix,
    ergodic_average,
    evolve_exact,
    evolve_split,
    evolve_trotter,
    unravel,
)
from .gibbs import (
    GibbsState,
    WeightedMetric,
    coupling,
    inner,
    make_gibbs,
    observable_metric,
    observable_metric_tau1,
    phi_inverse,
    phi_map,
    state_metric,
    state_metric_transposed,
    weighted_metric,
)
from .lindblad import (
    GeneratorPair,
    JumpOperatorSet,
    build_generators,
    dissipation,
    gram_form_G,
    phi_apply,
)
from .modular import build_modular, check_modular_commutation, check_S_operator
from .operators import (
    HermitianOperator,
    SuperOperator,
    hermitian_function,
    sandwich_superop,
    schatten_norm,
    unvec,
    vec,
)
from .qdb import (
    SpectrumSpec,
    build_A_tensors,
    build_bohr_table,
    build_K,
    check_condition_A,
    coefficient_tables,
    modular_average,
    synthesize,
    verify_qdb,
)
from .spectral import (
    commutant,
    ergodic_limit_check,
    gap_decay_check,
    null_spaces,
    spectral_report,
    structure_check,
    weighted_adjoint,
)

__version__ = "0.1.0"
