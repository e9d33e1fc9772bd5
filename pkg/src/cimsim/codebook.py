"""CIM codebook construction and analog-network weight synthesis.

The codebook indexes B of the C channel clusters.  Per cluster the best
effective path maximizes |w^H H f|^2 with the beamformer/combiner
steered at that path; clusters are then picked greedily in descending
effective gain.  Two hardware models synthesize the analog weights:
ideal single phase shifters (continuous phases, ``bank=None``) and a
hardware-efficient bank of fixed phase shifters combined through
switches, which floors every phase to a 2*pi / 2**(n_shifters-1) grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization, steering_matrix

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class FpsBank:
    """Fixed phase shifter bank: phases (2*pi/2^(n-1)) * [0, 1, 2, 4, ...]."""

    n_shifters: int

    def __post_init__(self) -> None:
        if self.n_shifters < 2:
            raise ValueError("need at least two fixed phase shifters")

    @property
    def phases(self) -> np.ndarray:
        step = TWO_PI / 2 ** (self.n_shifters - 1)
        values = np.concatenate([[0.0], 2.0 ** np.arange(self.n_shifters - 1)])
        return step * values

    @property
    def phase_step(self) -> float:
        return TWO_PI / 2 ** (self.n_shifters - 1)


def compose_switch_vector(theta: float, bank: FpsBank) -> np.ndarray:
    """Switch settings realizing the largest bank phase sum <= wrap(theta).

    Greedy descent from the largest shifter: close a switch whenever its
    phase still fits under the remaining target.  The realized phase
    l @ phases is wrap(theta) floored to the bank's phase grid.
    """
    phases = bank.phases
    switches = np.zeros(bank.n_shifters, dtype=np.int8)
    remaining = float(np.mod(theta, TWO_PI))
    for i in range(bank.n_shifters - 1, -1, -1):
        if phases[i] <= remaining:
            switches[i] = 1
            remaining -= phases[i]
    return switches


def realized_phase(switches: np.ndarray, bank: FpsBank) -> float:
    return float(np.asarray(switches) @ bank.phases)


def quantize_phase(theta: float, bank: FpsBank) -> float:
    return realized_phase(compose_switch_vector(theta, bank), bank)


def quantize_weights(weights: np.ndarray, bank: FpsBank) -> np.ndarray:
    """Replace each entry's phase by its bank-realizable floor; magnitudes
    are untouched.

    Runs the same greedy descent as ``compose_switch_vector`` on every
    entry at once, so both routes realize bit-identical phases.
    """
    weights = np.asarray(weights, dtype=complex)
    phases = bank.phases
    remaining = np.mod(np.angle(weights), TWO_PI)
    omega = np.zeros_like(remaining)
    for i in range(bank.n_shifters - 1, -1, -1):
        closed = phases[i] <= remaining
        remaining = np.where(closed, remaining - phases[i], remaining)
        omega = np.where(closed, omega + phases[i], omega)
    return np.abs(weights) * np.exp(1j * omega)


@dataclass
class CimCodebook:
    """Gain-ordered indexed clusters with their analog weights.

    ``clusters[k]`` is the cluster carrying spatial symbol k;
    ``beamformers[:, k]`` / ``combiners[:, k]`` are its Tx/Rx weights.
    """

    order: int                    # B, number of indexed clusters
    clusters: tuple[int, ...]     # selected cluster ids, descending gain
    beamformers: np.ndarray       # (N_t, B) complex
    combiners: np.ndarray         # (N_r, B) complex
    best_paths: np.ndarray        # (C,) best path index per cluster
    effective_gains: np.ndarray   # (B,) |w^H H f|^2 of the selected clusters

    @property
    def bits(self) -> int:
        return int(np.log2(self.order))


def _per_path_gains(realization: ChannelRealization) -> np.ndarray:
    """|w^H H f|^2 for every path, shape (C, L)."""
    h = realization.matrix
    a_t = steering_matrix(realization.tx_positions, realization.aod_az,
                          realization.aod_el, realization.wavelength)
    a_r = steering_matrix(realization.rx_positions, realization.aoa_az,
                          realization.aoa_el, realization.wavelength)
    eff = np.einsum("np,nm,mp->p", a_r.conj(), h, a_t)
    return np.abs(eff).reshape(realization.gains.shape) ** 2


def best_effective_path(realization: ChannelRealization, cluster: int) -> int:
    """Index of the path maximizing |w^H H f|^2 in one cluster (lowest wins
    ties)."""
    if not 0 <= cluster < realization.n_clusters:
        raise ValueError(f"cluster {cluster} out of range")
    if realization.n_paths < 1:
        raise ValueError("cluster has no paths")
    gains = _per_path_gains(realization)[cluster]
    return int(np.argmax(gains))


def build_codebook(realization: ChannelRealization, order: int,
                   bank: FpsBank | None = None) -> CimCodebook:
    """Greedy gain-descending codebook of ``order`` clusters.

    Selection always uses the ideal (continuous-phase) steering vectors;
    when ``bank`` is given the stored beamformers and combiners are
    quantized to the bank's phase grid afterwards.
    """
    c_count = realization.n_clusters
    if order > c_count:
        raise ValueError("codebook order exceeds cluster count")
    if order < 1 or (order & (order - 1)) != 0:
        raise ValueError("codebook order must be a power of two")

    path_gains = _per_path_gains(realization)
    best_paths = np.argmax(path_gains, axis=1)
    cluster_gains = path_gains[np.arange(c_count), best_paths]

    selected: list[int] = []
    remaining = list(range(c_count))
    for _ in range(order):
        best = max(remaining, key=lambda c: (cluster_gains[c], -c))
        selected.append(best)
        remaining.remove(best)

    lam = realization.wavelength
    beamformers = steering_matrix(
        realization.tx_positions,
        realization.aod_az[selected, best_paths[selected]],
        realization.aod_el[selected, best_paths[selected]], lam)
    combiners = steering_matrix(
        realization.rx_positions,
        realization.aoa_az[selected, best_paths[selected]],
        realization.aoa_el[selected, best_paths[selected]], lam)
    if bank is not None:
        beamformers = quantize_weights(beamformers, bank)
        combiners = quantize_weights(combiners, bank)

    return CimCodebook(order=order, clusters=tuple(selected),
                       beamformers=beamformers, combiners=combiners,
                       best_paths=best_paths,
                       effective_gains=cluster_gains[selected])
