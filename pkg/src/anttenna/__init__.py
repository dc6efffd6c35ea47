"""Thin-wire toroidal antenna analysis and ant-colony design search."""

from anttenna.errors import (
    AntennaError,
    ValidationError,
    SingularSystemError,
    UnsupportedOperationError,
    OpenCircuitError,
    DegeneratePortError,
    ActivePortError,
    DegeneratePatternError,
    OneSidedWidthError,
    ObjectiveError,
    ConnectivityError,
    SweepError,
)
from anttenna.geometry import (
    TorusSpec,
    DipoleSpec,
    Segment,
    SegmentList,
    discretize_torus,
    discretize_dipole,
    thin_wire_check,
)
from anttenna.mom import (
    ImpedanceMatrix,
    Excitation,
    CurrentSolution,
    PortParams,
    assemble_impedance_matrix,
    solve_currents,
    input_impedance,
    reflection_coefficient,
    vswr,
    surface_current_density,
    port_params,
)

__version__ = "0.1.0"
from anttenna.farfield import (
    GridSpec,
    PatternGrid,
    LobeStats,
    radiation_pattern,
    total_radiated_power,
    directivity_gain,
    lobe_stats,
)
