"""Built-in antenna objectives for the ant-colony search."""

from __future__ import annotations

import dataclasses
import math
from typing import Mapping, Sequence

from anttenna.aco import Objective
from anttenna.errors import ValidationError
from anttenna.farfield import GridSpec, directivity_gain, radiation_pattern
from anttenna.geometry import TorusSpec, discretize_torus
from anttenna.mom import (
    Z0_DEFAULT,
    Excitation,
    assemble_impedance_matrix,
    input_impedance,
    reflection_coefficient,
    solve_currents,
)

# dB costs can be negative; this keeps Q / (cost + offset) well defined.
DB_COST_OFFSET = 200.0

GEOMETRY_AXES = {f.name for f in dataclasses.fields(TorusSpec)}


def check_axes(names) -> None:
    unknown = sorted(set(names) - GEOMETRY_AXES)
    if unknown:
        raise ValidationError(
            [f"unknown design axis {n!r}; expected one of {sorted(GEOMETRY_AXES)}"
             for n in unknown])


def apply_assignment(base: TorusSpec, assignment: Mapping) -> TorusSpec:
    values = dict(assignment)
    for key in ("num_segments", "feed_index"):
        if key in values:
            values[key] = int(values[key])
    return dataclasses.replace(base, **values).validate()


def _solve(spec: TorusSpec, freq: float):
    segs = discretize_torus(spec)
    z = assemble_impedance_matrix(segs, freq)
    return segs, solve_currents(z, Excitation.delta_gap(1.0, segs.feed_index), segs)


def s11_objective(base: TorusSpec, freqs: Sequence[float],
                  z0: float = Z0_DEFAULT) -> Objective:
    """Worst-case |S11| in dB over ``freqs`` (lower is a better match)."""
    freqs = tuple(float(f) for f in freqs)
    if not freqs:
        raise ValidationError("s11 objective needs at least one frequency", field="freqs")

    def cost(assignment):
        spec = apply_assignment(base, assignment)
        worst = -math.inf
        for f in freqs:
            _, sol = _solve(spec, f)
            mag = abs(reflection_coefficient(input_impedance(sol), z0))
            worst = max(worst, 20 * math.log10(max(mag, 1e-300)))
        return worst

    return Objective(cost, "worst_s11_db", DB_COST_OFFSET)


def gain_objective(base: TorusSpec, freq: float,
                   grid: GridSpec | None = None) -> Objective:
    """Negative peak gain (dBi) at ``freq``."""
    grid = grid or GridSpec(theta_step=2.0, phi_step=4.0)

    def cost(assignment):
        spec = apply_assignment(base, assignment)
        segs, sol = _solve(spec, float(freq))
        pattern = directivity_gain(radiation_pattern(sol, segs, grid))
        return -float(pattern.gain_dbi.max())

    return Objective(cost, "negative_peak_gain_dbi", DB_COST_OFFSET)


def target_objective(targets: Mapping[str, float], weights: Mapping[str, float] | None = None,
                     floor: float = 1.0) -> Objective:
    """Separable ``floor + sum w*(value - target)**2``; cheap, for checking the search."""
    targets = {k: float(v) for k, v in targets.items()}
    weights = {k: float((weights or {}).get(k, 1.0)) for k in targets}

    def cost(assignment):
        return floor + sum(weights[k] * (float(assignment[k]) - t) ** 2
                           for k, t in targets.items())

    return Objective(cost, "target_distance")
