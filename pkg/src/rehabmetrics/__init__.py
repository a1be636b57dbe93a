"""Motion analytics for upper-limb rehabilitation.

Capture (wire protocol, simulated sensors), orientation fusion, forward
kinematics of the arm, per-session movement metrics, reference-based
progress scoring, the published study statistics, and an HTTP service a
therapist console can drive.
"""

from .catalog import THERAPIES, THERAPY_CODES, Therapy, get_therapy
from .metrics import PMV_COMPONENTS, compute_pmv
from .scoring import build_rpmv, delta, score_sessions
from .session import SessionConfig, SessionMode, SessionRunner
from .simulate import MotionProfile, synthesize_session
from .stats import reproduce_study
from .storage import DataStore

__version__ = "0.1.0"

__all__ = [
    "THERAPIES",
    "THERAPY_CODES",
    "Therapy",
    "get_therapy",
    "PMV_COMPONENTS",
    "compute_pmv",
    "build_rpmv",
    "delta",
    "score_sessions",
    "SessionConfig",
    "SessionMode",
    "SessionRunner",
    "MotionProfile",
    "synthesize_session",
    "reproduce_study",
    "DataStore",
    "__version__",
]
