"""escapesim: deterministic pursuit-evasion simulation.

One fast evader (speed 1+eps) against unit-speed pursuers in the plane. The
package derives the certified constants of the recursive evasion strategy,
simulates it against plug-in pursuer policies, and verifies the claimed
trajectory invariants on the recorded traces.
"""

__version__ = "0.1.0"

from .geometry import Point2
from .params import ParameterSet, StartConfiguration, derive_cascade
from .strategy import MoveKind
from .verdicts import Verdict

__all__ = [
    "Point2",
    "ParameterSet",
    "StartConfiguration",
    "derive_cascade",
    "MoveKind",
    "Verdict",
    "__version__",
]
