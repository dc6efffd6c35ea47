"""Thin-wire method of moments: pulse basis, point matching at segment centres.

Each segment carries a constant (pulse) current.  The current jumps at the
segment ends, which by continuity leaves point charges ``+-I/(j*omega)``
there.  The tangential field at match point ``m`` due to unit current on
segment ``n`` is then

    Z[m, n] = j*omega*mu * (t_m . t_n) * integral_n G dl'
              + 1/(j*omega*eps) * t_m . [grad G(r_m; end_n) - grad G(r_m; start_n)]

with the reduced kernel ``G = exp(-jkR) / (4 pi R)``, ``R = sqrt(d^2 + a^2)``.
The vector-potential integral uses Gauss-Legendre quadrature; on the
diagonal the static ``1/R`` part is integrated in closed form first.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from anttenna.errors import (
    ActivePortError,
    DegeneratePortError,
    OpenCircuitError,
    SingularSystemError,
    UnsupportedOperationError,
    ValidationError,
)
from anttenna.geometry import C0, SegmentList

MU0 = 1.25663706212e-6
EPS0 = 1.0 / (MU0 * C0 * C0)
ETA0 = MU0 * C0

QUADRATURE_ORDER = 8
Z0_DEFAULT = 50.0
PIVOT_RTOL = 1e-14
RESIDUAL_RTOL = 1e-10


@dataclass(frozen=True, eq=False)
class ImpedanceMatrix:
    values: np.ndarray
    frequency: float

    @property
    def order(self) -> int:
        return self.values.shape[0]

    def __getitem__(self, idx):
        return self.values[idx]


@dataclass(frozen=True)
class Excitation:
    """Delta-gap voltage source or incident plane wave.

    Build with :meth:`delta_gap` or :meth:`plane_wave`.
    """

    kind: str
    voltage: complex = 0.0
    segment: int = 0
    e0: complex = 0.0
    direction: tuple = (0.0, 0.0, -1.0)
    polarization: tuple = (1.0, 0.0, 0.0)

    def __post_init__(self):
        if self.kind == "delta-gap":
            if self.voltage == 0:
                raise ValidationError("gap voltage must be non-zero", field="voltage")
        elif self.kind == "plane-wave":
            k = np.asarray(self.direction, float)
            p = np.asarray(self.polarization, float)
            problems = []
            if abs(np.linalg.norm(k) - 1) > 1e-9:
                problems.append("propagation direction must be a unit vector")
            if abs(np.linalg.norm(p) - 1) > 1e-9:
                problems.append("polarization must be a unit vector")
            if abs(float(k @ p)) >= 1e-9:
                problems.append("polarization must be perpendicular to propagation")
            if problems:
                raise ValidationError(problems)
        else:
            raise ValidationError(f"unknown excitation kind {self.kind!r}", field="kind")

    @classmethod
    def delta_gap(cls, voltage: complex = 1.0, segment: int = 0) -> "Excitation":
        return cls("delta-gap", voltage=voltage, segment=int(segment))

    @classmethod
    def plane_wave(cls, e0: complex = 1.0, direction=(0.0, 0.0, -1.0),
                   polarization=(1.0, 0.0, 0.0)) -> "Excitation":
        return cls("plane-wave", e0=e0, direction=tuple(map(float, direction)),
                   polarization=tuple(map(float, polarization)))

    def rhs(self, segments: SegmentList, freq: float) -> np.ndarray:
        """Tangential incident field at every match point."""
        n = len(segments)
        v = np.zeros(n, dtype=complex)
        if self.kind == "delta-gap":
            if not 0 <= self.segment < n:
                raise ValidationError(
                    f"feed segment {self.segment} out of range [0, {n})", field="segment")
            v[self.segment] = self.voltage / segments.lengths[self.segment]
        else:
            k = 2 * math.pi * freq / C0
            d = np.asarray(self.direction)
            p = np.asarray(self.polarization)
            phase = np.exp(-1j * k * (segments.centers @ d))
            v[:] = self.e0 * (segments.tangents @ p) * phase
        return v

    def scaled(self, factor: complex) -> "Excitation":
        if self.kind == "delta-gap":
            return Excitation.delta_gap(self.voltage * factor, self.segment)
        return Excitation.plane_wave(self.e0 * factor, self.direction, self.polarization)


@dataclass(frozen=True, eq=False)
class CurrentSolution:
    currents: np.ndarray
    frequency: float
    excitation: Excitation
    residual: float = 0.0

    def scaled(self, factor: complex) -> "CurrentSolution":
        """Same solution for an excitation ``factor`` times stronger."""
        return CurrentSolution(self.currents * factor, self.frequency,
                               self.excitation.scaled(factor), self.residual)

    @property
    def feed_current(self) -> complex:
        return complex(self.currents[self.excitation.segment])

    @property
    def input_power(self) -> float:
        """Power accepted at a delta-gap port, 1/2 Re(V conj(I))."""
        if self.excitation.kind != "delta-gap":
            raise UnsupportedOperationError("input power needs a delta-gap excitation")
        return 0.5 * float(np.real(self.excitation.voltage * np.conj(self.feed_current)))


@dataclass(frozen=True)
class PortParams:
    z_in: complex
    gamma: complex
    vswr: float
    peak_surface_current: float
    input_power: float
    z0: float = Z0_DEFAULT

    @property
    def s11_db(self) -> float:
        mag = abs(self.gamma)
        return -math.inf if mag == 0 else 20 * math.log10(mag)


def _kernel(r: np.ndarray, k: float) -> np.ndarray:
    return np.exp(-1j * k * r) / (4 * math.pi * r)


def _kernel_gradient_factor(r: np.ndarray, k: float) -> np.ndarray:
    """dG/dR divided by R, so grad G = (obs - src) * factor."""
    return -(1 + 1j * k * r) * np.exp(-1j * k * r) / (4 * math.pi * r**3)


def assemble_impedance_matrix(segments: SegmentList, freq: float,
                              order: int = QUADRATURE_ORDER) -> ImpedanceMatrix:
    if not freq > 0:
        raise ValidationError(f"freq must be > 0 (got {freq})", field="freq")
    if len(segments) < 1:
        raise ValidationError("need at least one segment")
    omega = 2 * math.pi * freq
    k = omega / C0
    obs = segments.centers                      # (M, 3)
    tan = segments.tangents                     # (N, 3)
    lens = segments.lengths                     # (N,)
    rad = segments.radii                        # (N,)
    xg, wg = np.polynomial.legendre.leggauss(order)

    # Vector potential: integral of G over each source segment, per observer.
    s = 0.5 * lens[:, None] * xg[None, :]                         # (N, Q)
    src = segments.centers[:, None, :] + s[..., None] * tan[:, None, :]   # (N, Q, 3)
    d = obs[:, None, None, :] - src[None, :, :, :]                # (M, N, Q, 3)
    rr = np.sqrt(np.einsum("mnqi,mnqi->mnq", d, d) + rad[None, :, None] ** 2)
    g = _kernel(rr, k)
    diag = np.arange(len(segments))
    # Self term: subtract the static part and add its exact integral.
    g[diag, diag, :] -= 1.0 / (4 * math.pi * rr[diag, diag, :])
    psi = np.einsum("mnq,q->mn", g, wg) * 0.5 * lens[None, :]
    half = 0.5 * lens
    psi[diag, diag] += 2 * np.arcsinh(half / rad) / (4 * math.pi)

    vector = 1j * omega * MU0 * (tan @ tan.T) * psi

    # Scalar potential: end charges of each pulse.
    def grad_dot(ends):
        dd = obs[:, None, :] - ends[None, :, :]                   # (M, N, 3)
        r = np.sqrt(np.einsum("mni,mni->mn", dd, dd) + rad[None, :] ** 2)
        return np.einsum("mi,mni->mn", tan, dd) * _kernel_gradient_factor(r, k)

    scalar = (grad_dot(segments.ends) - grad_dot(segments.starts)) / (1j * omega * EPS0)
    return ImpedanceMatrix(vector + scalar, float(freq))


def _lu_solve(values: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    scale = float(np.abs(values).max()) if values.size else 0.0
    if scale == 0.0 or not np.all(np.isfinite(values)):
        raise SingularSystemError("impedance matrix is zero or non-finite")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(values, check_finite=False)
    pivots = np.abs(np.diag(lu))
    if pivots.min() < PIVOT_RTOL * scale:
        raise SingularSystemError(
            f"pivot {pivots.min():.3e} below {PIVOT_RTOL:g} x max|Z| = {scale:.3e}"
        )
    return scipy.linalg.lu_solve((lu, piv), rhs, check_finite=False)


def solve_currents(z: ImpedanceMatrix, excitation: Excitation,
                   segments: SegmentList) -> CurrentSolution:
    """Solve ``Z I = V`` by LU with partial pivoting."""
    if z.order != len(segments):
        raise ValidationError(
            f"matrix order {z.order} does not match {len(segments)} segments")
    v = excitation.rhs(segments, z.frequency)
    i = _lu_solve(z.values, v)
    vnorm = np.linalg.norm(v)
    residual = float(np.linalg.norm(z.values @ i - v) / vnorm) if vnorm else 0.0
    if residual >= RESIDUAL_RTOL:
        raise SingularSystemError(f"relative residual {residual:.3e} too large")
    return CurrentSolution(i, z.frequency, excitation, residual)


def input_impedance(solution: CurrentSolution) -> complex:
    if solution.excitation.kind != "delta-gap":
        raise UnsupportedOperationError("input impedance needs a delta-gap excitation")
    i_feed = solution.feed_current
    if abs(i_feed) < 1e-15:
        raise OpenCircuitError(f"feed current {abs(i_feed):.3e} A is effectively zero")
    return complex(solution.excitation.voltage / i_feed)


def reflection_coefficient(z_in: complex, z0: float = Z0_DEFAULT) -> complex:
    if not z0 > 0:
        raise ValidationError(f"z0 must be > 0 (got {z0})", field="z0")
    den = z_in + z0
    if den == 0:
        raise DegeneratePortError(f"z_in = -z0 = {-z0} makes the port degenerate")
    return complex((z_in - z0) / den)


def vswr(gamma: complex) -> float:
    mag = abs(gamma)
    if mag > 1 + 1e-9:
        raise ActivePortError(f"|gamma| = {mag:.12g} > 1; solution is not passive")
    if mag >= 1 - 1e-12:
        return math.inf
    return (1 + mag) / (1 - mag)


def surface_current_density(solution: CurrentSolution, segments: SegmentList) -> float:
    """Peak of |I| / (2 pi a) over all segments, in A/m."""
    return float(np.max(np.abs(solution.currents) / (2 * math.pi * segments.radii)))


def port_params(solution: CurrentSolution, segments: SegmentList,
                z0: float = Z0_DEFAULT) -> PortParams:
    z_in = input_impedance(solution)
    gamma = reflection_coefficient(z_in, z0)
    return PortParams(
        z_in=z_in,
        gamma=gamma,
        vswr=vswr(gamma),
        peak_surface_current=surface_current_density(solution, segments),
        input_power=solution.input_power,
        z0=z0,
    )
