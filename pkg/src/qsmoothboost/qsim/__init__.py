"""Statevector simulation of the quantum subroutines used by the booster."""
from .amplify import C_A, AmplifiedUnitary, amplitude_amplify, fixed_point_schedule, predicted_mass
from .backend import (
    C_C,
    CostModelBackend,
    ExactBackend,
    approx_count,
    count_charge,
    get_backend,
    phase_qubits,
    prep_rounds,
    prepare_distribution_state,
    repetitions,
)
from .state import (
    VALUE_BITS,
    DistributionLoader,
    Layout,
    StateVector,
    WeightOracle,
    apply_oracle,
    apply_value_rotation,
    decode_fixed,
    encode_fixed,
    measure,
)
