"""Far-zone fields of segment currents, radiated power, gain and lobe statistics."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from anttenna.errors import DegeneratePatternError, OneSidedWidthError, ValidationError
from anttenna.geometry import C0, SegmentList
from anttenna.mom import ETA0, CurrentSolution

HALF_POWER_DB = 3.0
_FLOOR_DB = -400.0


@dataclass(frozen=True)
class GridSpec:
    theta_step: float = 1.0
    phi_step: float = 2.0
    theta_start: float = 0.0
    theta_stop: float = 180.0
    phi_start: float = 0.0
    phi_stop: float = 360.0     # exclusive

    def axes(self) -> tuple[np.ndarray, np.ndarray]:
        problems = []
        if not (self.theta_step > 0 and self.phi_step > 0):
            problems.append("grid steps must be > 0")
        if not (0 <= self.theta_start <= self.theta_stop <= 180):
            problems.append("theta range must lie within [0, 180]")
        if not (self.phi_start < self.phi_stop and self.phi_stop - self.phi_start <= 360):
            problems.append("phi range must be non-empty and span at most 360")
        if problems:
            raise ValidationError(problems)
        nt = (self.theta_stop - self.theta_start) / self.theta_step
        npf = (self.phi_stop - self.phi_start) / self.phi_step
        if abs(nt - round(nt)) > 1e-9 or abs(npf - round(npf)) > 1e-9:
            raise ValidationError("grid steps must divide the angle ranges evenly")
        nt, npf = int(round(nt)), int(round(npf))
        if npf < 1:
            raise ValidationError("empty grid")
        theta = self.theta_start + self.theta_step * np.arange(nt + 1)
        phi = self.phi_start + self.phi_step * np.arange(npf)
        return theta, phi


@dataclass(frozen=True, eq=False)
class PatternGrid:
    """Far field sampled on a regular (theta, phi) grid.

    ``e_theta``/``e_phi`` are r*E with the exp(-jkr) factor removed, in volts,
    shaped ``(len(theta_deg), len(phi_deg))``.
    """

    theta_deg: np.ndarray
    phi_deg: np.ndarray
    e_theta: np.ndarray
    e_phi: np.ndarray
    gain_dbi: np.ndarray | None = None
    frequency: float | None = None

    @property
    def intensity(self) -> np.ndarray:
        """Radiation intensity U in W/sr."""
        return (np.abs(self.e_theta) ** 2 + np.abs(self.e_phi) ** 2) / (2 * ETA0)

    @property
    def is_full_sphere(self) -> bool:
        th, ph = self.theta_deg, self.phi_deg
        if len(th) < 2 or len(ph) < 1:
            return False
        step = 360.0 / len(ph)
        return (abs(th[0]) < 1e-9 and abs(th[-1] - 180) < 1e-9
                and abs(ph[0]) < 1e-9 and np.allclose(np.diff(ph), step)
                and np.allclose(np.diff(th), th[1] - th[0]))

    @classmethod
    def from_intensity(cls, theta_deg, phi_deg, intensity, frequency=None) -> "PatternGrid":
        """Synthetic pattern with all power in E_theta; mainly for checks."""
        u = np.asarray(intensity, float)
        e = np.sqrt(2 * ETA0 * u).astype(complex)
        return cls(np.asarray(theta_deg, float), np.asarray(phi_deg, float),
                   e, np.zeros_like(e), None, frequency)


def radiation_pattern(solution: CurrentSolution, segments: SegmentList,
                      grid: GridSpec | None = None) -> PatternGrid:
    """Coherent sum of the segment far fields.

    A uniform current on a straight segment radiates like a filament at its
    midpoint times the element factor sinc(k*L*cos(psi)/2); for short
    segments that factor is ~1.
    """
    theta, phi = (grid or GridSpec()).axes()
    if len(theta) == 0 or len(phi) == 0:
        raise ValidationError("empty grid")
    k = 2 * math.pi * solution.frequency / C0
    th = np.radians(theta)[:, None]
    ph = np.radians(phi)[None, :]
    st, ct, sp, cp = np.sin(th), np.cos(th), np.sin(ph), np.cos(ph)
    rhat = np.stack(np.broadcast_arrays(st * cp, st * sp, ct), axis=-1)        # (T, P, 3)
    that = np.stack(np.broadcast_arrays(ct * cp, ct * sp, -st), axis=-1)
    phat = np.stack(np.broadcast_arrays(-sp, cp, 0 * th + 0 * ph), axis=-1)

    moments = solution.currents * segments.lengths                              # (N,)
    proj = rhat @ segments.tangents.T                                           # (T, P, N)
    phase = np.exp(1j * k * (rhat @ segments.centers.T))
    element = np.sinc(k * segments.lengths * proj / (2 * math.pi))
    weights = phase * element * moments                                         # (T, P, N)
    vec = weights @ segments.tangents                                           # (T, P, 3)
    pref = -1j * k * ETA0 / (4 * math.pi)
    e_theta = pref * np.einsum("tpi,tpi->tp", vec, that)
    e_phi = pref * np.einsum("tpi,tpi->tp", vec, phat)
    return PatternGrid(theta, phi, e_theta, e_phi, None, solution.frequency)


def _sphere_weights(grid: PatternGrid) -> np.ndarray:
    if not grid.is_full_sphere:
        raise ValidationError(
            "grid must cover the full sphere: theta 0..180 inclusive, phi uniform over 0..360")
    th = np.radians(grid.theta_deg)
    dth = th[1] - th[0]
    wt = np.full(len(th), dth)
    wt[0] = wt[-1] = dth / 2
    wt *= np.sin(th)
    dph = 2 * math.pi / len(grid.phi_deg)
    return wt[:, None] * np.full(len(grid.phi_deg), dph)[None, :]


def total_radiated_power(grid: PatternGrid) -> float:
    """Integrate U over the sphere: trapezoid in theta, periodic trapezoid in phi."""
    return float(np.sum(_sphere_weights(grid) * grid.intensity))


def directivity_gain(grid: PatternGrid) -> PatternGrid:
    """Fill ``gain_dbi``; exact nulls become -inf.  Lossless, so gain = directivity."""
    p_rad = total_radiated_power(grid)
    if not p_rad > 0:
        raise DegeneratePatternError("pattern radiates no power")
    lin = 4 * math.pi * grid.intensity / p_rad
    with np.errstate(divide="ignore"):
        gain = 10 * np.log10(lin)
    return replace(grid, gain_dbi=gain)


def mean_linear_gain(grid: PatternGrid) -> float:
    w = _sphere_weights(grid)
    return float(np.sum(w * 10 ** (grid.gain_dbi / 10)) / (4 * math.pi))


@dataclass(frozen=True)
class LobeStats:
    main_lobe_magnitude: float
    main_lobe_direction: float
    angular_width_3db: float
    side_lobe_level: float | None = None

    def as_dict(self) -> dict:
        return {
            "main_lobe_magnitude": self.main_lobe_magnitude,
            "main_lobe_direction": self.main_lobe_direction,
            "angular_width_3db": self.angular_width_3db,
            "side_lobe_level": self.side_lobe_level,
        }


def great_circle_cut(grid: PatternGrid, phi_deg: float) -> tuple[np.ndarray, np.ndarray]:
    """Gain along the great circle through the poles at azimuth ``phi_deg``.

    Returns angles in [0, 360): theta on the ``phi`` half, then 360 - theta on
    the ``phi + 180`` half.
    """
    if grid.gain_dbi is None:
        raise ValidationError("grid has no gain; run directivity_gain first")
    i = _phi_index(grid, phi_deg)
    j = _phi_index(grid, (phi_deg + 180.0) % 360.0)
    th = grid.theta_deg
    front = grid.gain_dbi[:, i]
    back = grid.gain_dbi[-2:0:-1, j]
    angles = np.concatenate([th, 360.0 - th[-2:0:-1]])
    return angles, np.concatenate([front, back])


def conical_cut(grid: PatternGrid, theta_deg: float) -> tuple[np.ndarray, np.ndarray]:
    if grid.gain_dbi is None:
        raise ValidationError("grid has no gain; run directivity_gain first")
    hits = np.flatnonzero(np.isclose(grid.theta_deg, theta_deg, atol=1e-9))
    if not len(hits):
        raise ValidationError(f"theta={theta_deg} is not a grid sample", field="cut")
    return grid.phi_deg.copy(), grid.gain_dbi[hits[0], :].copy()


def _phi_index(grid: PatternGrid, phi_deg: float) -> int:
    d = np.abs((grid.phi_deg - phi_deg + 180.0) % 360.0 - 180.0)
    i = int(np.argmin(d))
    if d[i] > 1e-9:
        raise ValidationError(f"phi={phi_deg} is not a grid sample", field="cut")
    return i


def lobe_stats(angles_deg, gain_db, periodic: bool = False,
               peak_db: float | None = None) -> LobeStats:
    """Main-lobe peak, direction, -3 dB width and side-lobe level of a cut.

    ``angles_deg`` must be ascending.  With ``periodic=True`` the cut wraps
    (a full 360 deg great circle or conical cut).  ``peak_db`` is the global
    maximum of the full grid; the cut must pass through it.
    """
    a = np.asarray(angles_deg, float)
    g = np.nan_to_num(np.asarray(gain_db, float), neginf=_FLOOR_DB)
    n = len(a)
    if n < 3 or len(g) != n:
        raise ValidationError("cut needs at least 3 matching samples")
    if np.any(np.diff(a) <= 0):
        raise ValidationError("cut angles must be strictly ascending")
    i0 = int(np.argmax(g))      # first maximum: smallest angle wins ties
    top = float(g[i0])
    if peak_db is not None and top < peak_db - 1e-6:
        raise ValidationError(
            f"cut peak {top:.4f} dB does not reach the global peak {peak_db:.4f} dB")
    threshold = top - HALF_POWER_DB
    span = 360.0 if periodic else 0.0

    def angle(j):
        # Unwrapped angle of (possibly out-of-range) index j.
        return a[j % n] + span * (j // n)

    def walk(step):
        j = i0
        for _ in range(n - 1):
            nxt = j + step
            if not periodic and not 0 <= nxt < n:
                break
            if g[nxt % n] <= threshold:
                v0, v1 = g[j % n], g[nxt % n]
                t = (threshold - v0) / (v1 - v0)
                return angle(j) + t * (angle(nxt) - angle(j))
            j = nxt
        raise OneSidedWidthError(
            f"no -3 dB crossing on the {'upper' if step > 0 else 'lower'} side of "
            f"the peak at {a[i0]:.3f} deg")

    upper, lower = walk(+1), walk(-1)

    def valley(step):
        # First local minimum flanking the peak (inclusive bounds of the main lobe).
        j = i0
        for _ in range(n - 1):
            nxt = j + step
            if not periodic and not 0 <= nxt < n:
                return j
            if g[nxt % n] > g[j % n]:
                return j
            j = nxt
        return j

    hi, lo = valley(+1), valley(-1)
    main = {k % n for k in range(lo, hi + 1)} if hi - lo < n else set(range(n))
    side = None
    for j in range(n):
        if j in main:
            continue
        if periodic:
            left, right = g[(j - 1) % n], g[(j + 1) % n]
        else:
            left = g[j - 1] if j > 0 else g[j]
            right = g[j + 1] if j < n - 1 else g[j]
        if g[j] >= left and g[j] >= right and (g[j] > left or g[j] > right):
            side = g[j] if side is None else max(side, g[j])
    return LobeStats(
        main_lobe_magnitude=top if peak_db is None else float(peak_db),
        main_lobe_direction=float(a[i0]),
        angular_width_3db=float(upper - lower),
        side_lobe_level=None if side is None else float(side - top),
    )
