"""Self-contained oracle checks, exposed through the ``verify`` CLI command.

Each check pits an implementation path against an independent route
(exhaustive enumeration, closed-form value, or analytic identity) and
reports one PASS/FAIL line.  These complement the pytest suite; they are
quick enough to run before trusting a long sweep.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .arrays import GeometrySpec, element_positions, steering_vector
from .channel import ChannelConfig, path_loss, sample_realization
from .codebook import (FpsBank, best_effective_path, build_codebook,
                       compose_switch_vector, realized_phase)
from .link import LinkConfig, TxSymbols, bit_errors, ml_detect, \
    psk_constellation, transmit_and_receive
from .patterns import steered_pattern


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str


def check_switch_composition(max_shifters: int = 6,
                             grid_points: int = 2000) -> CheckResult:
    """Greedy switch composition vs exhaustive subset-sum maximization.

    Subset sums are exact integer multiples of the bank's phase step, so
    the maximization is done in rational arithmetic (no float rounding
    in the oracle).
    """
    from fractions import Fraction
    thetas = np.linspace(0.0, 2.0 * np.pi, grid_points, endpoint=False)
    mismatches = 0
    for n_f in range(2, max_shifters + 1):
        bank = FpsBank(n_f)
        step = Fraction(bank.phase_step)
        weights = [0] + [2 ** j for j in range(n_f - 1)]
        multipliers = sorted(
            {sum(w for w, bit in zip(weights, pattern) if bit)
             for pattern in product((0, 1), repeat=n_f)})
        for theta in thetas:
            switches = compose_switch_vector(theta, bank)
            greedy_m = sum(w for w, bit in zip(weights, switches) if bit)
            ratio = Fraction(float(np.mod(theta, 2.0 * np.pi))) / step
            best_m = max(m for m in multipliers if m <= ratio)
            mismatches += greedy_m != best_m
    return CheckResult("switch-composition equals exhaustive subset-sum",
                       mismatches == 0, f"{mismatches} mismatches")


def check_quantization_bound(max_shifters: int = 8,
                             grid_points: int = 2000) -> CheckResult:
    """0 <= wrap(theta) - realized phase < bank phase step."""
    thetas = np.linspace(-2.0 * np.pi, 4.0 * np.pi, grid_points)
    violations = 0
    for n_f in range(2, max_shifters + 1):
        bank = FpsBank(n_f)
        for theta in thetas:
            wrapped = float(np.mod(theta, 2.0 * np.pi))
            omega = realized_phase(compose_switch_vector(theta, bank), bank)
            if not (0.0 <= wrapped - omega < bank.phase_step):
                violations += 1
    return CheckResult("quantization error inside one phase step",
                       violations == 0, f"{violations} violations")


def check_steering_norms(seed: int = 7, samples: int = 200) -> CheckResult:
    """Steering vectors are unit norm with 1/sqrt(N) entry magnitudes."""
    rng = np.random.default_rng(seed)
    lam = 0.0107
    specs = [GeometrySpec.ula(82, lam), GeometrySpec.ura(9, 9, lam),
             GeometrySpec.uca(82, lam),
             GeometrySpec.cca((0.76, 1.36, 2.09, 2.99), (9, 17, 25, 31), lam)]
    worst = 0.0
    for spec in specs:
        pos = element_positions(spec)
        for _ in range(samples):
            az = rng.uniform(0, 2 * np.pi)
            el = rng.uniform(0, np.pi)
            a = steering_vector(pos, az, el, lam)
            worst = max(worst, abs(np.linalg.norm(a) - 1.0))
            worst = max(worst,
                        np.abs(np.abs(a) - 1 / np.sqrt(len(a))).max())
    return CheckResult("steering vectors unit-norm", worst <= 1e-12,
                       f"max deviation = {worst:.2e}")


def check_path_loss() -> CheckResult:
    """Closed-form path loss at the scenario distance."""
    expected = 72.0 + 10.0 * 2.92 * np.log10(150.0)
    got = path_loss(150.0, 72.0, 2.92, 0.0)
    return CheckResult("path loss closed form", abs(got - expected) < 1e-9,
                       f"PL(150 m) = {got:.4f} dB")


def check_directivity_normalization() -> CheckResult:
    """Quadrature normalization vs the exact pairwise-sinc integral."""
    lam = 0.0107
    spec = GeometrySpec.ura(6, 6, lam)
    pat = steered_pattern(spec, 10.0, 20.0, az_step_deg=0.5, el_step_deg=0.5)
    pos = element_positions(spec)
    from .patterns import steering_weights
    w = steering_weights(spec, 10.0, 20.0)
    diff = pos[:, None, :] - pos[None, :, :]
    arg = 2 * np.pi / lam * np.linalg.norm(diff, axis=-1)
    sinc = np.where(arg > 0, np.sin(np.maximum(arg, 1e-30)) / np.maximum(arg, 1e-30), 1.0)
    mean_exact = float(np.real(np.einsum("m,n,mn->", w, w.conj(), sinc)))
    lin = 10 ** (pat.gain_db / 10.0)
    el = np.deg2rad(pat.el_deg)
    wel = np.sin(el)
    wel[0] *= 0.5
    wel[-1] *= 0.5
    quad = (lin * wel[:, None]).sum() * np.deg2rad(0.5) ** 2 / (4 * np.pi)
    # pattern is 4*pi-normalized, so quad must be 1; the sinc identity
    # checks the raw power integral handled inside compute_pattern
    peak_lin = 10 ** (pat.gain_db.max() / 10.0)
    n = pos.shape[0]
    d_exact = n / mean_exact
    rel = abs(peak_lin - d_exact) / d_exact
    ok = abs(quad - 1.0) < 1e-3 and rel < 1e-3
    return CheckResult("pattern normalization vs sinc-sum oracle", ok,
                       f"quad closure = {quad - 1.0:+.2e}, "
                       f"peak vs exact = {rel:.2e}")


def check_noiseless_detection(seed: int = 11) -> CheckResult:
    """Every (x0, x1) decodes exactly without noise on a random channel."""
    lam = 0.0107
    spec = GeometrySpec.ura(4, 4, lam)
    pos = element_positions(spec)
    cfg = ChannelConfig(clusters=4, paths_per_cluster=3)
    realization = sample_realization(cfg, pos, pos, seed)
    cb = build_codebook(realization, 4)
    link = LinkConfig(4, 4, 1.0, 1.0, 1.0, 0.0)
    points = psk_constellation(4)
    rng = np.random.default_rng(0)
    failures = 0
    for x0 in range(4):
        for x1 in range(4):
            tx = TxSymbols.from_values(x0, x1, points)
            z = transmit_and_receive(cb, realization.matrix, tx, link, rng)
            det = ml_detect(z, cb, realization.matrix, link)
            if bit_errors(tx, det, link) != (0, 0):
                failures += 1
    return CheckResult("noiseless ML detection exact", failures == 0,
                       f"{failures} failed hypotheses")


def check_best_path_bruteforce(seed: int = 3) -> CheckResult:
    """Greedy best-path pick equals an explicit per-path scan."""
    lam = 0.0107
    spec = GeometrySpec.ula(4, lam)
    pos = element_positions(spec)
    cfg = ChannelConfig(clusters=3, paths_per_cluster=5)
    mismatches = 0
    for s in range(seed, seed + 10):
        realization = sample_realization(cfg, pos, pos, s)
        for c in range(cfg.clusters):
            from .channel import steering_matrix
            best, best_gain = 0, -1.0
            for l in range(cfg.paths_per_cluster):
                f = steering_matrix(pos, realization.aod_az[c, l],
                                    realization.aod_el[c, l], lam)[:, 0]
                w = steering_matrix(pos, realization.aoa_az[c, l],
                                    realization.aoa_el[c, l], lam)[:, 0]
                g = abs(w.conj() @ realization.matrix @ f) ** 2
                if g > best_gain:
                    best, best_gain = l, g
            if best_effective_path(realization, c) != best:
                mismatches += 1
    return CheckResult("best effective path vs brute force", mismatches == 0,
                       f"{mismatches} mismatches")


ALL_CHECKS = (
    check_switch_composition,
    check_quantization_bound,
    check_steering_norms,
    check_path_loss,
    check_directivity_normalization,
    check_noiseless_detection,
    check_best_path_bruteforce,
)


def run_all(verbose: bool = True) -> bool:
    ok = True
    for check in ALL_CHECKS:
        result = check()
        ok &= result.passed
        if verbose:
            status = "PASS" if result.passed else "FAIL"
            print(f"[{status}] {result.name}: {result.detail}")
    return ok
