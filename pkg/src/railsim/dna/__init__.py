"""Delocalized network architecture: qubits spread across nodes, local
operations per node, and a simulated central controller protocol."""

from .network import (
    DelocalizedQubit,
    NodeLayout,
    apply_node_phase,
    delocalize,
    dna_logical_x_measure,
    dna_logical_z_measure,
    dna_type_II_fusion,
)
from .protocol import (
    GroupConfig,
    ProtocolScenario,
    ProtocolTranscript,
    nested_pump_delays,
    pump_delay_schedule,
    replay_transcript,
    run_protocol,
    scenario_from_dict,
)

__all__ = [name for name in dir() if not name.startswith("_")]
