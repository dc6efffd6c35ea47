"""Torus and dipole parameterization and straight-segment discretization.

The torus is modeled as a closed thin-wire loop in the z=0 plane centred on
the origin; its conductor radius stands in for the tube (minor) radius.
Segment ``k`` is centred on azimuth ``2*pi*k/N`` so the default feed
(``feed_index=0``) sits on the +x axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from anttenna.errors import ValidationError

C0 = 299792458.0

MIN_TORUS_SEGMENTS = 8


@dataclass(frozen=True)
class TorusSpec:
    major_radius: float = 0.02
    wire_radius: float = 0.001
    num_segments: int = 64
    feed_index: int = 0

    def problems(self) -> list[str]:
        out = []
        if not self.major_radius > 0:
            out.append(f"major_radius must be > 0 (got {self.major_radius})")
        if not self.wire_radius > 0:
            out.append(f"wire_radius must be > 0 (got {self.wire_radius})")
        elif self.major_radius > 0 and not self.wire_radius < self.major_radius / 10:
            out.append(
                f"wire_radius must be < major_radius/10 "
                f"(got {self.wire_radius} vs {self.major_radius / 10})"
            )
        if not isinstance(self.num_segments, (int, np.integer)) \
                or self.num_segments < MIN_TORUS_SEGMENTS:
            out.append(
                f"num_segments must be an integer >= {MIN_TORUS_SEGMENTS} "
                f"(got {self.num_segments})"
            )
        elif not (0 <= self.feed_index < self.num_segments):
            out.append(
                f"feed_index must be in [0, {self.num_segments}) (got {self.feed_index})"
            )
        return out

    def validate(self) -> "TorusSpec":
        problems = self.problems()
        if problems:
            raise ValidationError(problems)
        return self

    def scaled(self, factor: float) -> "TorusSpec":
        return TorusSpec(self.major_radius * factor, self.wire_radius * factor,
                         self.num_segments, self.feed_index)


@dataclass(frozen=True)
class DipoleSpec:
    length: float
    wire_radius: float
    num_segments: int

    @property
    def feed_index(self) -> int:
        return self.num_segments // 2

    def problems(self) -> list[str]:
        out = []
        if not self.length > 0:
            out.append(f"length must be > 0 (got {self.length})")
        if not self.wire_radius > 0:
            out.append(f"wire_radius must be > 0 (got {self.wire_radius})")
        if not isinstance(self.num_segments, (int, np.integer)) or self.num_segments < 1:
            out.append(f"num_segments must be a positive integer (got {self.num_segments})")
        elif self.num_segments % 2 == 0:
            out.append(
                f"num_segments must be odd so a centre feed segment exists "
                f"(got {self.num_segments})"
            )
        return out

    def validate(self) -> "DipoleSpec":
        problems = self.problems()
        if problems:
            raise ValidationError(problems)
        return self


@dataclass(frozen=True, eq=False)
class Segment:
    start: np.ndarray
    end: np.ndarray
    wire_radius: float

    @cached_property
    def length(self) -> float:
        return float(np.linalg.norm(self.end - self.start))

    @cached_property
    def center(self) -> np.ndarray:
        return 0.5 * (self.start + self.end)

    @cached_property
    def tangent(self) -> np.ndarray:
        return (self.end - self.start) / self.length


@dataclass(frozen=True, eq=False)
class SegmentList:
    """Ordered chain of straight segments plus the feed location.

    Vectorized views (``starts``, ``ends``, ``centers``, ``tangents``,
    ``lengths``, ``radii``) are what the solver actually consumes.
    """

    segments: tuple[Segment, ...]
    closed: bool
    feed_index: int
    source: object = field(default=None, compare=False)

    def __len__(self) -> int:
        return len(self.segments)

    def __iter__(self):
        return iter(self.segments)

    def __getitem__(self, k) -> Segment:
        return self.segments[k]

    @cached_property
    def starts(self) -> np.ndarray:
        return np.array([s.start for s in self.segments])

    @cached_property
    def ends(self) -> np.ndarray:
        return np.array([s.end for s in self.segments])

    @cached_property
    def centers(self) -> np.ndarray:
        return np.array([s.center for s in self.segments])

    @cached_property
    def tangents(self) -> np.ndarray:
        return np.array([s.tangent for s in self.segments])

    @cached_property
    def lengths(self) -> np.ndarray:
        return np.array([s.length for s in self.segments])

    @cached_property
    def radii(self) -> np.ndarray:
        return np.array([s.wire_radius for s in self.segments])

    @property
    def total_length(self) -> float:
        return float(self.lengths.sum())


def _chain(nodes, wire_radius, closed, feed_index, source) -> SegmentList:
    n = len(nodes) if closed else len(nodes) - 1
    # Adjacent segments share the very same node array, so closure is exact.
    segs = tuple(
        Segment(nodes[k], nodes[(k + 1) % len(nodes)], wire_radius) for k in range(n)
    )
    return SegmentList(segs, closed, feed_index, source)


def ring_segments(major_radius: float, wire_radius: float, n: int,
                  feed_index: int = 0, source=None) -> SegmentList:
    """Closed regular N-gon inscribed in a circle; no spec validation."""
    nodes = []
    for k in range(n):
        phi = 2.0 * math.pi * (k - 0.5) / n
        node = np.array([major_radius * math.cos(phi), major_radius * math.sin(phi), 0.0])
        node.flags.writeable = False
        nodes.append(node)
    return _chain(nodes, float(wire_radius), True, int(feed_index), source)


def discretize_torus(spec: TorusSpec) -> SegmentList:
    """Inscribe an N-gon in the ring of radius ``major_radius``.

    Nodes sit at azimuth ``2*pi*(k - 1/2)/N`` so segment ``k`` is centred
    on azimuth ``2*pi*k/N``. Total chord length is ``N*2R*sin(pi/N)``.
    """
    spec.validate()
    return ring_segments(float(spec.major_radius), float(spec.wire_radius),
                         int(spec.num_segments), int(spec.feed_index), spec)


def discretize_dipole(spec: DipoleSpec) -> SegmentList:
    """Split a z-directed dipole spanning [-L/2, L/2] into equal segments."""
    spec.validate()
    n = int(spec.num_segments)
    half = 0.5 * float(spec.length)
    zs = np.linspace(-half, half, n + 1)
    zs[0], zs[-1] = -half, half
    nodes = []
    for z in zs:
        node = np.array([0.0, 0.0, z])
        node.flags.writeable = False
        nodes.append(node)
    return _chain(nodes, float(spec.wire_radius), False, spec.feed_index, spec)


def wavelength(freq: float) -> float:
    return C0 / freq


@dataclass
class DiagnosticsReport:
    freq: float
    wavelength: float
    thick_wire: bool = False
    long_segment: bool = False
    stubby_segment: bool = False
    warnings: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.warnings


def thin_wire_check(segments: SegmentList, freq: float) -> DiagnosticsReport:
    """Flag geometry/frequency combinations outside thin-wire validity.

    Warnings only; nothing here raises for a bad geometry.
    """
    if not freq > 0:
        raise ValidationError(f"freq must be > 0 (got {freq})", field="freq")
    lam = wavelength(freq)
    report = DiagnosticsReport(freq=freq, wavelength=lam)
    a_max = float(segments.radii.max())
    d_max = float(segments.lengths.max())
    ratio = segments.lengths / segments.radii
    if a_max > lam / 100:
        report.thick_wire = True
        report.warnings.append(
            f"wire radius {a_max:.4g} m exceeds lambda/100 = {lam / 100:.4g} m"
        )
    if d_max > lam / 10:
        report.long_segment = True
        report.warnings.append(
            f"segment length {d_max:.4g} m exceeds lambda/10 = {lam / 10:.4g} m"
        )
    if float(ratio.min()) < 2.0:
        report.stubby_segment = True
        report.warnings.append(
            f"segment length {float(segments.lengths.min()):.4g} m is below "
            f"2 x wire radius"
        )
    return report


def discretize(spec) -> SegmentList:
    if isinstance(spec, TorusSpec):
        return discretize_torus(spec)
    if isinstance(spec, DipoleSpec):
        return discretize_dipole(spec)
    raise ValidationError(f"unknown geometry spec {type(spec).__name__}")


def spec_as_dict(spec) -> dict:
    kind = "torus" if isinstance(spec, TorusSpec) else "dipole"
    out = {"kind": kind}
    out.update({k: getattr(spec, k) for k in spec.__dataclass_fields__})
    if kind == "dipole":
        out["feed_index"] = spec.feed_index
    return out
