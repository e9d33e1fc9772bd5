"""Far-field array-factor patterns: directivity, HPBW and side-lobe stats.

The pattern is sampled on a spherical (az, el) grid expressed in the
array's *pattern chart*: a rotated polar frame whose equator passes
through the array broadside.  For the planar arrays (URA/UCA/CCA, z = 0
plane) the chart pole sits on the array y-axis and broadside (+z) lies
at chart (az, el) = (0, 90 deg); for the ULA the chart is the plain
polar frame (pole on the array axis).  Beam-pointing offsets (0, 0)
therefore always mean broadside, and the two HPBW cuts follow the grid
lines through the steering target.

Directivity is normalized so the linear pattern integrates to 4*pi over
the sphere (midpoint/trapezoid quadrature with the sin(el) Jacobian).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .arrays import ArrayKind, GeometrySpec, element_positions, \
    steering_vector_for_direction

HALF_POWER_DB = 10.0 * np.log10(2.0)
MAIN_LOBE_FLOOR_DB = 20.0  # main lobe = connected region above peak - 20 dB

# Chart basis for planar arrays, columns = chart axes in array coords:
# chart x -> array z (broadside), chart y -> array x, chart z -> array y.
_PLANAR_FRAME = np.array([[0.0, 1.0, 0.0],
                          [0.0, 0.0, 1.0],
                          [1.0, 0.0, 0.0]])


def pattern_frame(kind: ArrayKind | str) -> np.ndarray:
    """Rotation taking chart coordinates to array coordinates."""
    if ArrayKind(kind) is ArrayKind.ULA:
        return np.eye(3)
    return _PLANAR_FRAME.copy()


def chart_directions(az: np.ndarray, el: np.ndarray,
                     frame: np.ndarray) -> np.ndarray:
    """Unit direction vectors in array coordinates, shape (..., 3)."""
    az, el = np.broadcast_arrays(np.asarray(az, float), np.asarray(el, float))
    se, ce = np.sin(el), np.cos(el)
    d = np.stack([se * np.cos(az), se * np.sin(az), ce], axis=-1)
    return d @ np.asarray(frame, float).T


@dataclass
class RadiationPattern:
    """Directivity samples over a chart (az, el) grid, in dBi."""

    az_deg: np.ndarray          # (A,) azimuth grid, degrees
    el_deg: np.ndarray          # (E,) polar grid, degrees (0..180)
    gain_db: np.ndarray         # (E, A) directivity, dBi
    steer_az_deg: float         # steering target, chart coordinates
    steer_el_deg: float
    frame: np.ndarray = field(default_factory=lambda: np.eye(3))

    @property
    def az_step_deg(self) -> float:
        return float(self.az_deg[1] - self.az_deg[0])

    @property
    def el_step_deg(self) -> float:
        return float(self.el_deg[1] - self.el_deg[0])

    def target_index(self) -> tuple[int, int]:
        """Grid indices (el, az) nearest the steering target."""
        ia = int(np.argmin(np.abs(self.az_deg - self.steer_az_deg)))
        ie = int(np.argmin(np.abs(self.el_deg - self.steer_el_deg)))
        return ie, ia


@dataclass
class PatternSummary:
    """HPBW widths are in chart degrees; side lobes in absolute dBi.

    ``asld_db`` is the geometric mean (dB average) of the side-lobe
    directivity sampled over every forward-hemisphere grid cell outside
    the main lobe; ``sidelobe_dbi`` lists the distinct lobe peaks.
    """

    directivity_dbi: float       # directivity at the steering target
    hpbw_az_deg: float           # half-power width along the azimuth cut
    hpbw_el_deg: float           # half-power width along the elevation cut
    sidelobe_dbi: np.ndarray     # peak directivity of each detected side lobe
    asld_db: float               # dB mean over sampled side-lobe directivity

    @property
    def sidelobe_rel_db(self) -> np.ndarray:
        return self.sidelobe_dbi - self.directivity_dbi


def steering_weights(spec: GeometrySpec, az_off_deg: float = 0.0,
                     el_off_deg: float = 0.0) -> np.ndarray:
    """Conjugate-steering weights pointing (az_off, el_off) from broadside."""
    frame = pattern_frame(spec.kind)
    az0 = np.deg2rad(az_off_deg)
    el0 = np.deg2rad(90.0 - el_off_deg)
    direction = chart_directions(az0, el0, frame)
    pos = element_positions(spec)
    return steering_vector_for_direction(pos, direction, spec.wavelength)


def compute_pattern(positions: np.ndarray, weights: np.ndarray,
                    wavelength: float,
                    steer_az_deg: float = 0.0, steer_el_off_deg: float = 0.0,
                    az_step_deg: float = 0.25, el_step_deg: float = 0.25,
                    frame: np.ndarray | None = None,
                    row_chunk: int = 64) -> RadiationPattern:
    """Directivity pattern |w^H a|^2 N over the chart grid, 4*pi-normalized.

    ``steer_el_off_deg`` is the pointing offset from broadside; the grid
    stores the corresponding chart polar angle 90 - offset.
    """
    positions = np.asarray(positions, dtype=float)
    weights = np.asarray(weights, dtype=complex)
    if positions.shape[0] != weights.shape[0]:
        raise ValueError("weights length must match element count")
    if az_step_deg > 1.0 or el_step_deg > 1.0:
        raise ValueError("grid resolution must be 1 degree or finer")
    if frame is None:
        frame = np.eye(3)

    az_deg = np.arange(-180.0, 180.0, az_step_deg)
    el_deg = np.arange(0.0, 180.0 + el_step_deg / 2.0, el_step_deg)
    if az_deg.size == 0 or el_deg.size == 0:
        raise ValueError("empty pattern grid")
    az = np.deg2rad(az_deg)
    el = np.deg2rad(el_deg)
    kscale = 2.0 * np.pi / wavelength

    power = np.empty((el.size, az.size))
    wc = weights.conj()
    for i0 in range(0, el.size, row_chunk):
        i1 = min(i0 + row_chunk, el.size)
        d = chart_directions(az[None, :], el[i0:i1, None], frame)
        phase = kscale * np.tensordot(d, positions.T, axes=([2], [0]))
        af = np.exp(1j * phase) @ wc      # sqrt(N) * w^H a
        power[i0:i1] = np.abs(af) ** 2

    el_weights = np.sin(el)
    el_weights[0] *= 0.5
    el_weights[-1] *= 0.5
    integral = (power * el_weights[:, None]).sum() \
        * np.deg2rad(az_step_deg) * np.deg2rad(el_step_deg)
    directivity = power * (4.0 * np.pi / integral)
    gain_db = 10.0 * np.log10(np.maximum(directivity, 1e-300))
    return RadiationPattern(az_deg=az_deg, el_deg=el_deg, gain_db=gain_db,
                            steer_az_deg=steer_az_deg,
                            steer_el_deg=90.0 - steer_el_off_deg,
                            frame=np.asarray(frame, float))


def steered_pattern(spec: GeometrySpec, az_off_deg: float = 0.0,
                    el_off_deg: float = 0.0, az_step_deg: float = 0.25,
                    el_step_deg: float = 0.25,
                    weights: np.ndarray | None = None) -> RadiationPattern:
    """Pattern of a geometry steered (az_off, el_off) from broadside."""
    if weights is None:
        weights = steering_weights(spec, az_off_deg, el_off_deg)
    return compute_pattern(element_positions(spec), weights, spec.wavelength,
                           steer_az_deg=az_off_deg, steer_el_off_deg=el_off_deg,
                           az_step_deg=az_step_deg, el_step_deg=el_step_deg,
                           frame=pattern_frame(spec.kind))


def _half_power_width(values_db: np.ndarray, start: int, step_deg: float,
                      threshold_db: float) -> float:
    """Width around ``start`` until the cut drops below threshold both ways.

    The cut is treated as a closed circle.  Crossings are located by
    linear interpolation of the linear power between grid samples; if a
    side never crosses, the full circle (360 deg) is reported.
    """
    lin = 10.0 ** (values_db / 10.0)
    thr = 10.0 ** (threshold_db / 10.0)
    n = lin.size

    def distance(direction: int) -> float | None:
        prev = lin[start]
        for s in range(1, n):
            j = (start + direction * s) % n
            cur = lin[j]
            if cur < thr:
                frac = (prev - thr) / (prev - cur)
                return (s - 1 + frac) * step_deg
            prev = cur
        return None

    right = distance(+1)
    left = distance(-1)
    if right is None or left is None:
        return 360.0
    return right + left


def _elevation_circle(pattern: RadiationPattern, ia: int) -> np.ndarray:
    """Full meridian circle through azimuth column ia and its antipode.

    Index i of the returned cut equals grid row i for i < n_el; the walk
    then continues over the pole down the antipodal column.
    """
    n_az = pattern.az_deg.size
    ia_opp = (ia + n_az // 2) % n_az
    col = pattern.gain_db[:, ia]
    col_opp = pattern.gain_db[::-1, ia_opp]
    return np.concatenate([col, col_opp[1:-1]])


def summarize(pattern: RadiationPattern) -> PatternSummary:
    """Peak directivity, half-power widths and side-lobe statistics."""
    ie, ia = pattern.target_index()
    peak_db = float(pattern.gain_db[ie, ia])
    threshold = peak_db - HALF_POWER_DB

    az_cut = pattern.gain_db[ie, :]
    hpbw_az = _half_power_width(az_cut, ia, pattern.az_step_deg, threshold)

    el_circle = _elevation_circle(pattern, ia)
    hpbw_el = _half_power_width(el_circle, ie, pattern.el_step_deg, threshold)

    return PatternSummary(directivity_dbi=peak_db, hpbw_az_deg=hpbw_az,
                          hpbw_el_deg=hpbw_el,
                          sidelobe_dbi=sidelobe_directivities(pattern),
                          asld_db=average_sidelobe_db(pattern))


def _neighbor_shifts(grid: np.ndarray) -> list[np.ndarray]:
    """grid values of the 8 neighbors, wrapping in az (axis 1), edge-clipped
    in el (axis 0) by repeating the edge rows."""
    padded = np.vstack([grid[:1], grid, grid[-1:]])
    out = []
    for de in (-1, 0, 1):
        for da in (-1, 0, 1):
            if de == 0 and da == 0:
                continue
            out.append(np.roll(padded, -da, axis=1)[1 + de:padded.shape[0] - 1 + de])
    return out


def main_lobe_mask(pattern: RadiationPattern) -> np.ndarray:
    """Connected region around the steering target above peak - 20 dB."""
    ie, ia = pattern.target_index()
    peak_db = pattern.gain_db[ie, ia]
    above = pattern.gain_db >= peak_db - MAIN_LOBE_FLOOR_DB
    labels, _ = ndimage.label(above, structure=np.ones((3, 3), dtype=int))
    return labels == labels[ie, ia]


def sidelobe_directivities(pattern: RadiationPattern,
                           forward_az_deg: float = 90.0) -> np.ndarray:
    """Side-lobe peak directivities (dBi) over the forward hemisphere.

    Side lobes are local maxima of the grid (plateaus deduplicated, so an
    azimuth-constant ring counts once) outside the main-lobe region and
    within |az| <= forward_az_deg of the chart, which excludes the mirror
    lobe behind a planar array.
    """
    g = pattern.gain_db
    is_max = np.ones(g.shape, dtype=bool)
    any_greater = np.zeros(g.shape, dtype=bool)
    for nb in _neighbor_shifts(g):
        is_max &= g >= nb
        any_greater |= g > nb
    candidates = is_max & any_greater
    candidates &= ~main_lobe_mask(pattern)

    labels, count = ndimage.label(candidates, structure=np.ones((3, 3), int))
    if count == 0:
        return np.array([])
    in_window = np.abs(pattern.az_deg) <= forward_az_deg
    window_labels = np.unique(labels[:, in_window])
    window_labels = window_labels[window_labels > 0]
    if window_labels.size == 0:
        return np.array([])
    peaks = ndimage.labeled_comprehension(g, labels, window_labels, np.max,
                                          float, np.nan)
    return np.sort(np.asarray(peaks))[::-1]


def average_sidelobe_db(pattern: RadiationPattern,
                        forward_az_deg: float = 90.0) -> float:
    """Geometric-mean side-lobe directivity in dB.

    The side-lobe region is sampled at every grid cell of the forward
    hemisphere (|az| <= forward_az_deg) outside the main lobe, and the
    dB values are averaged: the geometric mean of the sampled side-lobe
    directivities.
    """
    selected = ~main_lobe_mask(pattern)
    selected &= (np.abs(pattern.az_deg) <= forward_az_deg)[None, :]
    if not selected.any():
        return float("nan")
    return float(pattern.gain_db[selected].mean())


def pattern_to_rows(pattern: RadiationPattern) -> np.ndarray:
    """Flatten the grid to (az_deg, el_deg, gain_db) rows for CSV output."""
    aa, ee = np.meshgrid(pattern.az_deg, pattern.el_deg)
    return np.column_stack([aa.ravel(), ee.ravel(), pattern.gain_db.ravel()])
