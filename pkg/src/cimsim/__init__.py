"""Link-level simulator for cluster-index-modulation mmWave massive MIMO.

Covers the four classic array geometries (ULA/URA/UCA/CCA), clustered
Saleh-Valenzuela channels, greedy CIM codebook construction under ideal
or fixed-phase-shifter analog networks, joint ML detection, Monte Carlo
BER sweeps, and radiation-pattern analysis (directivity, HPBW, side-lobe
statistics).
"""

__version__ = "0.1.0"

from .arrays import (ArrayKind, GeometrySpec, SPEED_OF_LIGHT,
                     element_positions, scenario_geometry, steering_vector,
                     wave_number)
from .channel import (ChannelConfig, ChannelRealization, PathRecord,
                      assemble_matrix, path_loss, sample_realization)
from .codebook import (CimCodebook, FpsBank, best_effective_path,
                       build_codebook, compose_switch_vector, quantize_phase,
                       quantize_weights, realized_phase)
from .link import (DetectionResult, LinkConfig, TxSymbols, array_gain_db,
                   bit_errors, dbm_to_watt, ml_detect, psk_constellation,
                   transmit_and_receive)
from .patterns import (PatternSummary, RadiationPattern, compute_pattern,
                       pattern_frame, steered_pattern, steering_weights,
                       summarize)
from .harness import (BerResult, HardwareSpec, SimConfig, aggregate_and_emit,
                      load_config, run_sweep)

__all__ = [name for name in dir() if not name.startswith("_")]
