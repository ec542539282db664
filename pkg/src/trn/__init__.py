"""Time resource networks: temporal networks coupled with continuous resource constraints."""
from trn.atn import (
    ContingentLink,
    Normal,
    Pstn,
    Stnu,
    TcResult,
    UncertainDuration,
    gaussian_quantile,
    pstn_consistent,
    stnu_strong_controllability,
    tc_check,
)
from trn.cp import SolverConfig, SolveResult, SolverTimeout, solve, solve_exhaustive
from trn.resource import Ordering, ResourceConstraint, Trn
from trn.temporal import Stc, Stn, apsp, check_schedule, extract_schedule, stn_consistent

__version__ = "0.1.0"
