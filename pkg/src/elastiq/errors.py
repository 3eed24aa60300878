"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class ElastiqError(Exception):
    """Base class for every error raised by the package."""


class SingularJacobian(ElastiqError):
    """Deformation Jacobian I + grad is (numerically) singular."""


class SingularMetric(ElastiqError):
    """A metric could not be inverted on a finite-difference stencil."""


class DegenerateMaterial(ElastiqError):
    """Lamé parameters outside the admissible range."""


class UnstableRegime(ElastiqError):
    """The quadratic Hamiltonian has complex normal-mode frequencies."""

    def __init__(self, message: str, values=None):
        super().__init__(message)
        self.values = values


class StructureViolation(ElastiqError):
    """A canonical-structure certificate failed."""

    def __init__(self, message: str, norm: float = float("nan")):
        super().__init__(message)
        self.norm = norm


class OffShell(ElastiqError):
    """Momentum does not satisfy -q1^2 + q2^2 + q3^2 = 0."""


class DomainError(ElastiqError):
    """Input outside the domain of a closed-form construction."""


class UniverseMismatch(ElastiqError):
    """Grassmann elements built over different generator sets."""


class TruncationTooSmall(ElastiqError):
    """Fock truncation below the minimum of two levels."""


class MetricMismatch(ElastiqError):
    """Gamma anticommutators disagree with the metric they should represent."""


class SingularFrame(ElastiqError):
    """Spin frame S is not invertible on the stencil."""


class DegenerateFrame(ElastiqError):
    """The curved frame does not define a normal direction."""


class SignatureError(ElastiqError):
    """The metric has the wrong sign in the compact slot."""


class ModeLeakage(ElastiqError):
    """Modes with nonzero compact wavenumber where only q3 = 0 is allowed."""


class TruncationError(ElastiqError):
    """Requested mode index is beyond what the truncation can couple."""
