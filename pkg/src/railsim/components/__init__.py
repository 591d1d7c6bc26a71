"""Architectural building blocks: stochastic sources, Bell/cluster-state
generators (plain and multirail), fusion gates, and temporal erasers."""

from .sources import SourceSpec, sample_source, source_efficiency
from .bsg import (
    BSG_DETECTORS,
    BSG_PORTS,
    CLUSTER_HERALD_UNITARY,
    bsg_qubits,
    bsg_spec,
    classify_pair_branch,
    cluster_bsg_spec,
    multirail_bsg_qubits,
    multirail_bsg_spec,
    multirail_cluster_bsg_spec,
    multirail_herald_outcomes,
    multirail_success_probability,
    run_bsg,
    run_cluster_bsg,
    run_multirail_bsg,
    sweep_placements,
)
from .fusion import boosted_type_II_fusion, boosted_type_II_spec, type_I_fusion
from .erasure import (
    EraserSpec,
    ErasureClass,
    build_temporal_eraser,
    build_temporal_eraser_tree,
    classify_erasure,
)

__all__ = [name for name in dir() if not name.startswith("_")]
