"""railsim: exact few-photon simulation of switch-free photonic architectures.

Sparse Fock states over spatiotemporal modes, passive interferometer
compilation with a permanent oracle, heralded Bell/cluster generation,
multirail encodings with blocking-switch multiplexing, and a networked
protocol simulator with a classical central controller.
"""

__version__ = "0.1.0"

from .fock import (
    Mode,
    ModeRegister,
    PureState,
    apply_phase,
    apply_two_mode,
    block_modes,
    inner_product,
    lattice_register,
    make_state,
    measure_modes_exact,
    register,
    sample_measure,
)
from .optics import (
    InterferometerSpec,
    apply_dense_unitary,
    apply_spec,
    compile_hadamard,
    hadamard_matrix,
    permanent_amplitude,
    spec_to_matrix,
)
from .multirail import MultirailQubit, adaptive_measure, logical_readout, passive_multiplex, z_rotation
from .herald import Classification, HeraldOutcome

__all__ = [name for name in dir() if not name.startswith("_")]
