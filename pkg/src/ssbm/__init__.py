"""Sub-sampling block maxima: MPMR/EMR estimation, EVI by weighted least
squares, extremal index from rolling block maxima, and closed-form
references for four tail families."""

from .closedform import BmLaw
from .distributions import EmpiricalCdf, Family, TailModel
from .errors import (
    ConvergenceError,
    DegenerateError,
    DomainError,
    InputError,
    InsufficientDataError,
    NonexistenceError,
    SsbmError,
)
from .ei import EiCurve, theta_curve
from .evi import EviFit, wlse_emr, wlse_mpmr
from .plateau import PlateauRange, find_plateau, fit_sd_spline
from .subsample import BmCurve, SortedSample, bm_curve

__version__ = "0.1.0"
