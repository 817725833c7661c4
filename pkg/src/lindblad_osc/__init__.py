"""Second moments and uncertainty functions of a damped quantum harmonic
oscillator in the Lindblad theory of open quantum systems."""

from .core import *  # noqa: F401,F403
from .core import __all__ as _core_all
from .dynamics import *  # noqa: F401,F403
from .dynamics import __all__ as _dynamics_all
from .regimes import *  # noqa: F401,F403
from .regimes import __all__ as _regimes_all
from .uncertainty import *  # noqa: F401,F403
from .uncertainty import __all__ as _uncertainty_all

__version__ = "0.1.0"
__all__ = [*_core_all, *_dynamics_all, *_uncertainty_all, *_regimes_all]
