"""latcode: finite-dimensional lattice codes with CRC self error-detection.

Core pieces: exact nearest-point decoders for Z^n, A2, E8, and BW16; nested
lattice codes with hypercube shaping; CRC-embedded sublattices for detecting
decoding errors; multi-level retry decoding for single-user AWGN and for
compute-forward relaying; analytic error bounds; undetected-error probability
estimators; and CRC length optimization.
"""

from .bounds import cone_bound, cone_membership, effective_estimate
from .cf import (
    CfCandidate,
    computation_rate,
    enumerate_candidates,
    icf_decode,
    optimal_alpha,
    recover_messages,
    relay_retry,
    simulate_relay,
)
from .codes import (
    NestedLatticeCode,
    bw16_code_r2p25,
    e8_code_r2,
    mmse_alpha,
)
from .crcopt import (
    GainReport,
    RetryErrorModel,
    estimate_p_e_total,
    optimize_crc_length,
)
from .embed import (
    BinaryCode,
    CrcSpec,
    EmbeddedLattice,
    check_even_nesting,
    embed_encode,
    embed_generator,
    parity_check,
    snr_penalty_db,
)
from .lattices import (
    Lattice,
    a2,
    bw16,
    e8,
    effective_radius,
    kissing_set,
    minimal_norm2,
    mod_lattice,
    nearest_point,
    nearest_point_batch,
    sphere_decode,
    zn,
)
from .pud import crc_poly_search, p_ud_kissing, p_ud_monte_carlo, p_ud_parity, pud_table
from .retry import (
    AlphaCandidateList,
    retry_decode,
    search_candidates,
    simulate_oneshot,
    simulate_retry,
)
from .sim import SimConfig, awgn_channel, parse_config, run

__version__ = "0.1.0"

__all__ = [
    "AlphaCandidateList",
    "BinaryCode",
    "CfCandidate",
    "CrcSpec",
    "EmbeddedLattice",
    "GainReport",
    "Lattice",
    "NestedLatticeCode",
    "RetryErrorModel",
    "SimConfig",
    "a2",
    "awgn_channel",
    "bw16",
    "bw16_code_r2p25",
    "check_even_nesting",
    "computation_rate",
    "cone_bound",
    "cone_membership",
    "crc_poly_search",
    "e8",
    "e8_code_r2",
    "effective_estimate",
    "effective_radius",
    "embed_encode",
    "embed_generator",
    "enumerate_candidates",
    "estimate_p_e_total",
    "icf_decode",
    "kissing_set",
    "minimal_norm2",
    "mmse_alpha",
    "mod_lattice",
    "nearest_point",
    "nearest_point_batch",
    "optimal_alpha",
    "optimize_crc_length",
    "p_ud_kissing",
    "p_ud_monte_carlo",
    "p_ud_parity",
    "parity_check",
    "pud_table",
    "recover_messages",
    "relay_retry",
    "retry_decode",
    "run",
    "search_candidates",
    "simulate_oneshot",
    "simulate_relay",
    "simulate_retry",
    "snr_penalty_db",
    "sphere_decode",
    "zn",
    "parse_config",
]
