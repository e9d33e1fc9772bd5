"""Monte Carlo BER sweeps over (geometry, signaling, hardware, power).

Seeding is position-based: the channel and payload streams of trial r of
a (geometry, signaling) pair depend only on the master seed and the grid
position, never on the worker schedule, the hardware model or the power
point.  Power points and hardware models therefore share channel
realizations, payload bits and noise (common random numbers), and runs
are bit-reproducible for any worker count.

The hardware-efficient (HE) model applies the quantized weights in the
signal path while detection keeps the ideal-hardware hypothesis values,
which is what makes coarse banks floor out at high power.
"""

from __future__ import annotations

import dataclasses
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .arrays import ArrayKind, element_positions, scenario_geometry
from .channel import ChannelConfig, sample_realization
from .codebook import FpsBank, build_codebook
from .link import (LinkConfig, array_gain_db, branch_amplitudes, db_to_linear,
                   dbm_to_watt, psk_constellation)

DEFAULT_POWERS_DBM = tuple(float(p) for p in range(-10, 45, 5))


@dataclass(frozen=True)
class HardwareSpec:
    """Analog network model: ideal phase shifters or an FPS bank."""

    kind: str                  # "OP" or "HE"
    n_shifters: int = 0

    def __post_init__(self) -> None:
        if self.kind not in ("OP", "HE"):
            raise ValueError("hardware kind must be OP or HE")
        if self.kind == "HE" and self.n_shifters < 2:
            raise ValueError("HE hardware needs at least 2 phase shifters")

    @staticmethod
    def parse(token: str) -> "HardwareSpec":
        token = token.strip().upper().replace("(", "").replace(")", "")
        if token == "OP":
            return HardwareSpec("OP")
        if token.startswith("HE"):
            return HardwareSpec("HE", int(token[2:]))
        raise ValueError(f"unknown hardware token: {token!r}")

    @property
    def label(self) -> str:
        return "OP" if self.kind == "OP" else f"HE{self.n_shifters}"


@dataclass(frozen=True)
class SimConfig:
    channel: ChannelConfig = field(default_factory=ChannelConfig)
    geometries: tuple[str, ...] = ("ULA", "URA", "UCA", "CCA")
    signalings: tuple[tuple[int, int], ...] = ((2, 4),)
    hardware: tuple[str, ...] = ("OP",)
    powers_dbm: tuple[float, ...] = DEFAULT_POWERS_DBM
    realizations: int = 200
    symbols_per_realization: int = 100
    seed: int = 1
    n_rf: int = 0              # 0: minimum per signaling (B chains)
    n_elements: int = 82
    noise_dbm: float = -90.0
    error_limit: int = 500

    def __post_init__(self) -> None:
        if self.realizations < 1 or self.symbols_per_realization < 1:
            raise ValueError("trial counts must be at least 1")
        if not self.powers_dbm:
            raise ValueError("power sweep must be nonempty")
        for g in self.geometries:
            ArrayKind(g)
        for token in self.hardware:
            HardwareSpec.parse(token)
        for order, constellation in self.signalings:
            for v in (order, constellation):
                if v < 1 or (v & (v - 1)) != 0:
                    raise ValueError("B and M must be powers of two")
            if order > self.channel.clusters:
                raise ValueError("B must not exceed the cluster count")
            if self.n_rf and order > self.n_rf:
                raise ValueError("B must not exceed the RF chain count")

    @property
    def trials_per_point(self) -> int:
        return self.realizations * self.symbols_per_realization


@dataclass
class BerResult:
    geometry: str
    order: int
    constellation: int
    hardware: str
    n_shifters: int
    power_dbm: float
    bit_errors: int
    bits_total: int
    seed: int
    realizations_used: int
    elapsed_s: float = 0.0

    @property
    def ber(self) -> float:
        return self.bit_errors / self.bits_total if self.bits_total else float("nan")

    @property
    def standard_error(self) -> float:
        """Binomial standard error of the BER estimate."""
        if not self.bits_total:
            return float("nan")
        p = self.ber
        return float(np.sqrt(p * (1.0 - p) / self.bits_total))


_POPCOUNT = np.array([bin(i).count("1") for i in range(256)], dtype=np.int64)


def _run_curve(cfg: SimConfig, geometry_index: int,
               signaling_index: int, hardware_index: int) -> list[BerResult]:
    """All power points of one (geometry, signaling, hardware) curve."""
    started = time.perf_counter()
    geometry = cfg.geometries[geometry_index]
    order, constellation = cfg.signalings[signaling_index]
    hardware = HardwareSpec.parse(cfg.hardware[hardware_index])
    bank = FpsBank(hardware.n_shifters) if hardware.kind == "HE" else None

    spec = scenario_geometry(geometry, cfg.channel.wavelength, cfg.n_elements)
    positions = element_positions(spec)
    n = spec.n_elements
    gain = db_to_linear(array_gain_db(n))
    noise_w = dbm_to_watt(cfg.noise_dbm)
    points = psk_constellation(constellation)
    bits_per_use = int(np.log2(order) + np.log2(constellation))
    amplitudes = np.array([LinkConfig(order, constellation, dbm_to_watt(p),
                                      gain, gain, noise_w,
                                      cfg.n_rf or order).amplitude
                           for p in cfg.powers_dbm])

    n_powers = len(cfg.powers_dbm)
    errors = np.zeros(n_powers, dtype=np.int64)
    used = np.zeros(n_powers, dtype=np.int64)
    t_symbols = cfg.symbols_per_realization
    sigma = np.sqrt(noise_w / 2.0)

    for r in range(cfg.realizations):
        active = np.flatnonzero(errors < cfg.error_limit)
        if active.size == 0:
            break
        channel_seed = np.random.SeedSequence(
            [cfg.seed, geometry_index, signaling_index, r, 0])
        realization = sample_realization(cfg.channel, positions, positions,
                                         channel_seed)
        cb_detect = build_codebook(realization, order)
        cb_tx = cb_detect if bank is None \
            else build_codebook(realization, order, bank)

        payload_rng = np.random.default_rng(np.random.SeedSequence(
            [cfg.seed, geometry_index, signaling_index, r, 1]))
        x0 = payload_rng.integers(0, order, t_symbols)
        x1 = payload_rng.integers(0, constellation, t_symbols)
        noise = payload_rng.normal(0.0, sigma, (t_symbols, n)) \
            + 1j * payload_rng.normal(0.0, sigma, (t_symbols, n))

        # z = amp * (W^H H f) s + W^H n, for all symbols at once
        v_tx = cb_tx.combiners.conj().T @ realization.matrix @ cb_tx.beamformers
        signal = v_tx[:, x0].T * points[x1][:, None]            # (T, B)
        combined_noise = noise @ cb_tx.combiners.conj()         # (T, B)
        hyp = branch_amplitudes(cb_detect, realization.matrix)  # (B,)

        for i in active:
            z = amplitudes[i] * signal + combined_noise
            ref = amplitudes[i] * hyp[:, None] * points[None, :]
            metric = np.abs(z[:, :, None] - ref[None, :, :]) ** 2
            flat = metric.reshape(t_symbols, -1).argmin(axis=1)
            c_hat = flat // constellation
            s_hat = flat % constellation
            errors[i] += _POPCOUNT[np.bitwise_xor(x0, c_hat)].sum()
            errors[i] += _POPCOUNT[np.bitwise_xor(x1, s_hat)].sum()
            used[i] += 1

    elapsed = time.perf_counter() - started
    return [BerResult(geometry=geometry, order=order,
                      constellation=constellation, hardware=hardware.label,
                      n_shifters=hardware.n_shifters,
                      power_dbm=float(cfg.powers_dbm[i]),
                      bit_errors=int(errors[i]),
                      bits_total=int(used[i]) * t_symbols * bits_per_use,
                      seed=cfg.seed, realizations_used=int(used[i]),
                      elapsed_s=elapsed / n_powers)
            for i in range(n_powers)]


def run_sweep(cfg: SimConfig, workers: int = 1) -> list[BerResult]:
    """Full grid sweep; results ordered geometry-major, power-minor."""
    tasks = [(gi, si, hi)
             for gi in range(len(cfg.geometries))
             for si in range(len(cfg.signalings))
             for hi in range(len(cfg.hardware))]
    if workers <= 1 or len(tasks) == 1:
        curves = [_run_curve(cfg, *task) for task in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            curves = list(pool.map(_curve_task, [(cfg, *task) for task in tasks]))
    return [result for curve in curves for result in curve]


def _curve_task(payload: tuple) -> list[BerResult]:
    cfg, gi, si, hi = payload
    return _run_curve(cfg, gi, si, hi)


CSV_HEADER = ("geometry,B,M,hardware,N_F,P_dBm,bits_total,bit_errors,"
              "ber,seed\n")


def results_to_csv(results: list[BerResult]) -> str:
    lines = [CSV_HEADER]
    for r in results:
        lines.append(f"{r.geometry},{r.order},{r.constellation},{r.hardware},"
                     f"{r.n_shifters},{r.power_dbm:.6g},{r.bits_total},"
                     f"{r.bit_errors},{r.ber:.10e},{r.seed}\n")
    return "".join(lines)


def aggregate_and_emit(results: list[BerResult], out_dir: "str | Path",
                       cfg: SimConfig | None = None) -> tuple[Path, Path]:
    """Write ber_results.csv plus a JSON run manifest; returns both paths."""
    if not results:
        raise ValueError("no results to emit")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / "ber_results.csv"
    csv_path.write_text(results_to_csv(results))

    manifest = {
        "version": __version__,
        "config": _config_dict(cfg) if cfg is not None else None,
        "points": len(results),
        "realizations_used": {f"{r.geometry}/{r.order}x{r.constellation}/"
                              f"{r.hardware}/{r.power_dbm:g}": r.realizations_used
                              for r in results},
    }
    manifest_path = out / "run_manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True))
    return csv_path, manifest_path


def _config_dict(cfg: SimConfig) -> dict:
    d = dataclasses.asdict(cfg)
    d["channel"]["angular_spread_deg"] = float(
        np.rad2deg(cfg.channel.angular_spread_rad))
    return d


# --- flat key=value config files -------------------------------------------

_CHANNEL_KEYS = {
    "clusters": int,
    "paths_per_cluster": int,
    "pathloss_intercept_db": float,
    "pathloss_exponent": float,
    "shadowing_std_db": float,
    "carrier_hz": float,
}
_SIM_KEYS = {
    "realizations": int,
    "symbols_per_realization": int,
    "seed": int,
    "n_rf": int,
    "n_elements": int,
    "noise_dbm": float,
    "error_limit": int,
}


def _parse_powers(text: str) -> tuple[float, ...]:
    text = text.strip()
    if ":" in text:
        lo, hi, step = (float(v) for v in text.split(":"))
        return tuple(np.arange(lo, hi + step / 2.0, step).tolist())
    return tuple(float(v) for v in text.split(","))


def _parse_signalings(text: str) -> tuple[tuple[int, int], ...]:
    pairs = []
    for token in text.split(","):
        b, m = token.lower().split("x")
        pairs.append((int(b), int(m)))
    return tuple(pairs)


def load_config(path: "str | Path") -> SimConfig:
    """Flat key=value config; '#' comments; unknown keys are an error."""
    sim_kwargs: dict = {}
    chan_kwargs: dict = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key = value")
        key, _, value = line.partition("=")
        key = key.strip().lower()
        value = value.strip()
        if key in _SIM_KEYS:
            sim_kwargs[key] = _SIM_KEYS[key](value)
        elif key in _CHANNEL_KEYS:
            chan_kwargs[key] = _CHANNEL_KEYS[key](value)
        elif key == "geometries":
            sim_kwargs["geometries"] = tuple(v.strip().upper()
                                             for v in value.split(","))
        elif key == "signalings":
            sim_kwargs["signalings"] = _parse_signalings(value)
        elif key == "hardware":
            sim_kwargs["hardware"] = tuple(v.strip() for v in value.split(","))
        elif key == "powers_dbm":
            sim_kwargs["powers_dbm"] = _parse_powers(value)
        elif key == "angular_spread_deg":
            chan_kwargs["angular_spread_rad"] = float(np.deg2rad(float(value)))
        elif key in ("tx_position", "rx_position"):
            chan_kwargs[key] = tuple(float(v) for v in value.split(","))
        else:
            raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
    return SimConfig(channel=ChannelConfig(**chan_kwargs), **sim_kwargs)
