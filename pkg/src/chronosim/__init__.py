"""Quantum time dilation of clocks with quantized center-of-mass motion."""

__version__ = "0.1.0"

from .clocks import ClockModel, TimePOVM, clock_free_evolve, covariant_time_povm, oscillator_clock, two_level_clock
from .errors import *  # noqa: F401,F403
from .evolution import (
    EvolutionReport,
    dyson_first_order_clock_state,
    exact_flat_space_evolve,
    exact_grid_evolve,
    gravitational_limit_evolve,
    momentum_eigenstate_evolve,
)
from .hamiltonian import HamiltonianDecomposition, decompose_hamiltonian, total_grid_hamiltonian
from .metric import MetricCoefficients, pn_metric_expansion, schwarzschild_isotropic_metric
from .observables import (
    RateEstimate,
    UniversalityReport,
    classical_average_rate,
    coherent_discrimination_demo,
    fit_rate_factor,
    mechanism_sensitivity_demo,
    quantum_dilation_measure,
    readout_distribution,
    universality_check,
)
from .ordering import WEYL, Lambda, OrderedMonomial, OrderedPolynomial, expectation_of_ordered, order_monomial, polynomial
from .states import (
    GridDensity,
    GridSpec,
    PacketMixture,
    PureCMState,
    WavePacket,
    dephase_momentum,
    dephase_position,
    make_gaussian_packet,
    mix,
    pure,
    superpose,
    to_grid,
)
