"""Bass/SI spreading on networks: exact and reduced master equations,
infinite-population limits and exact Monte-Carlo simulation."""

from .limits import (
    closed_form_bass_1d,
    closed_form_bass_compart,
    closed_form_si_1d,
    closed_form_si_compart,
    solve_1d_limit,
    solve_compartmental,
    solve_twogroups_limit,
)
from .master_exact import solve_exact
from .master_reduced import solve_circle_reduced, solve_complete_reduced, solve_twogroups_reduced
from .networks import (
    CircleNetwork,
    CompleteNetwork,
    GeneralForm,
    GeneralNetwork,
    TwoGroupNetwork,
    materialize,
    validate,
)
from .schedules import RateSchedule, Segment
from .simulate import estimate_f, simulate_once
from .trajectory import LimitResult, Trajectory

__version__ = "0.1.0"
