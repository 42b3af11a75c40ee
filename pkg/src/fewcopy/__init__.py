"""Few-copy probabilistic entanglement verification.

Translate entanglement witnesses into weighted binary local observables, run
the random-setting detection protocol on simulated or recorded copies, and
bound the detection confidence with Kullback-Leibler tail estimates.
"""
from .bound import BoundResult, fullsep_bound
from .observables import BinaryObservable, LocalSetting, local_setting_of, success_probability
from .pauli import HermitianOperator, MixedState, PauliString, PureState, born_sample, expectation, pauli_multiply
from .protocol import (
    OutcomeRecord,
    VerificationReport,
    analyze,
    estimate_fidelity,
    false_positive_trial,
    run_protocol,
)
from .states import (
    H_GRAPH,
    Graph,
    StateSource,
    cluster6,
    generators6,
    graph_state,
    next_state,
    stabilizer_group,
)
from .stats import confidence_min, kl_divergence, n_max, rate_K
from .witness import MeasurementSet, WitnessSpec, builtin_w1, builtin_w2, graph_witness, translate

__version__ = "0.1.0"
