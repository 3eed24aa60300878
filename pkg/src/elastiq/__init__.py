"""Field theory of an isotropic elastic medium with one compact direction.

Submodules: ``fields``, ``kinematics``, ``geometry``, ``elastodynamics``,
``quantization``, ``spinor``, ``reduction`` and the ``cli`` front end.
"""

from .errors import ElastiqError
from .fields import DisplacementField, FourierMode, LameParameters

__all__ = ["DisplacementField", "ElastiqError", "FourierMode", "LameParameters"]
__version__ = "0.1.0"
