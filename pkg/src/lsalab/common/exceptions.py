"""Exception classes for the LSA verification laboratory."""

from typing import Any


class LsaLabError(Exception):
    """Base exception for lsalab errors."""

    def __init__(self, message: str, details: dict[str, Any] | None = None) -> None:
        """Initialize lsalab error.

        Args:
            message: Error message
            details: Structured context (offending values, indices)
        """
        self.message = message
        self.details = details or {}
        super().__init__(self.message)


class InvariantViolationError(LsaLabError):
    """A checked identity or bound failed; maps to CLI exit code 2."""


class NotHurwitzError(LsaLabError):
    """The matrix -A is not Hurwitz."""

    def __init__(
        self,
        message: str = "-A is not Hurwitz",
        spectral_abscissa: float | None = None,
    ) -> None:
        """Initialize Hurwitz error.

        Args:
            message: Error message
            spectral_abscissa: Largest real part of the eigenvalues of -A
        """
        self.spectral_abscissa = spectral_abscissa
        super().__init__(message, {"spectral_abscissa": spectral_abscissa})


class IllConditionedError(LsaLabError):
    """A dense solve returned a residual above tolerance."""

    def __init__(
        self,
        message: str = "Linear solve residual exceeds tolerance",
        residual: float | None = None,
    ) -> None:
        """Initialize ill-conditioning error.

        Args:
            message: Error message
            residual: Observed residual norm
        """
        self.residual = residual
        super().__init__(message, {"residual": residual})


class NotPositiveDefiniteError(LsaLabError):
    """A matrix required to be symmetric positive definite is not."""


class QNotPdError(NotPositiveDefiniteError):
    """The weighting matrix Q is not symmetric positive definite."""

    def __init__(self, message: str = "Q is not symmetric positive definite") -> None:
        """Initialize Q error."""
        super().__init__(message)


class AlphaOutOfRangeError(LsaLabError):
    """Step size outside the admissible contraction range."""

    def __init__(
        self,
        message: str = "Step size outside [0, alpha_cap]",
        alpha: float | None = None,
        alpha_cap: float | None = None,
    ) -> None:
        """Initialize step range error.

        Args:
            message: Error message
            alpha: Requested step size
            alpha_cap: Largest admissible step size
        """
        self.alpha = alpha
        self.alpha_cap = alpha_cap
        super().__init__(message, {"alpha": alpha, "alpha_cap": alpha_cap})


class DimMismatchError(LsaLabError):
    """Operands have incompatible dimensions."""


class LemmaViolationError(InvariantViolationError):
    """A proven implication failed numerically, signalling a numerics bug."""


class NotStochasticError(LsaLabError):
    """A kernel is not a stochastic matrix."""


class BadTailError(LsaLabError):
    """A survival function is not a valid tail of a positive integer law."""


class UnstableError(LsaLabError):
    """An autoregressive coefficient has spectral radius at least one."""

    def __init__(
        self,
        message: str = "Autoregressive coefficient is not stable",
        spectral_radius: float | None = None,
    ) -> None:
        """Initialize instability error.

        Args:
            message: Error message
            spectral_radius: Spectral radius of the coefficient matrix
        """
        self.spectral_radius = spectral_radius
        super().__init__(message, {"spectral_radius": spectral_radius})


class ReducibleError(LsaLabError):
    """The kernel is not irreducible."""


class PeriodicError(LsaLabError):
    """The kernel is irreducible but periodic."""

    def __init__(self, message: str = "Kernel is periodic", period: int | None = None) -> None:
        """Initialize periodicity error.

        Args:
            message: Error message
            period: Period of the chain
        """
        self.period = period
        super().__init__(message, {"period": period})


class MethodUnavailableError(LsaLabError):
    """The requested evaluation method is not supported by the model."""

    def __init__(self, message: str, method: str | None = None) -> None:
        """Initialize method error.

        Args:
            message: Error message
            method: Requested method name
        """
        self.method = method
        super().__init__(message, {"method": method})


class NotNonIncreasingError(LsaLabError):
    """A step-size sequence increases somewhere."""

    def __init__(
        self,
        message: str = "Step sizes are not non-increasing",
        index: int | None = None,
    ) -> None:
        """Initialize monotonicity error.

        Args:
            message: Error message
            index: First index k with alpha_{k+1} > alpha_k
        """
        self.index = index
        super().__init__(message, {"index": index})


class NotSquareSummableError(LsaLabError):
    """The squared step sizes are not summable."""


class StepTooLargeError(LsaLabError):
    """The first step size violates alpha_0 < 1/a."""


class HypothesisFailedError(LsaLabError):
    """A hypothesis required by an operation does not hold."""

    def __init__(self, message: str, hypothesis: str | None = None) -> None:
        """Initialize hypothesis error.

        Args:
            message: Error message
            hypothesis: Short name of the failed hypothesis
        """
        self.hypothesis = hypothesis
        super().__init__(message, {"hypothesis": hypothesis})


class MissingSmallSetError(LsaLabError):
    """No small-set constants are available at a required radius."""

    def __init__(
        self,
        message: str = "Small-set constants missing",
        radius: float | None = None,
    ) -> None:
        """Initialize small-set error.

        Args:
            message: Error message
            radius: Radius R at which (m_R, eps_R) was required
        """
        self.radius = radius
        super().__init__(message, {"radius": radius})


class RangeViolationError(LsaLabError):
    """Parameters fall outside the admissible range of a bound."""

    def __init__(self, message: str, parameter: str | None = None) -> None:
        """Initialize range error.

        Args:
            message: Error message
            parameter: Name of the offending parameter
        """
        self.parameter = parameter
        super().__init__(message, {"parameter": parameter})


class NoFeasibleBetaError(LsaLabError):
    """The window-chain drift condition has no feasible beta."""


class SingularAError(LsaLabError):
    """The averaged matrix A is singular."""


class AveragingNotConvergedError(LsaLabError):
    """Monte Carlo averaging CI is wider than the requested tolerance."""

    def __init__(
        self,
        message: str = "Ergodic average did not reach the requested precision",
        relative_width: float | None = None,
    ) -> None:
        """Initialize averaging error.

        Args:
            message: Error message
            relative_width: Observed relative CI half-width
        """
        self.relative_width = relative_width
        super().__init__(message, {"relative_width": relative_width})


class ProductOverflowError(LsaLabError):
    """A running matrix product exceeded the representable range."""

    def __init__(
        self,
        message: str = "Running product norm exceeds 1e300",
        step: int | None = None,
    ) -> None:
        """Initialize overflow error.

        Args:
            message: Error message
            step: Step index at which the overflow was detected
        """
        self.step = step
        super().__init__(message, {"step": step})


class StepAboveCapError(LsaLabError):
    """First step size is not below the stability cap alpha_inf."""

    def __init__(
        self,
        message: str = "alpha_1 is not below alpha_inf",
        alpha: float | None = None,
        alpha_cap: float | None = None,
    ) -> None:
        """Initialize step cap error.

        Args:
            message: Error message
            alpha: First step size of the schedule
            alpha_cap: Stability cap from the constants report
        """
        self.alpha = alpha
        self.alpha_cap = alpha_cap
        super().__init__(message, {"alpha": alpha, "alpha_cap": alpha_cap})


class DegenerateWindowError(LsaLabError):
    """Too few usable points for a decay fit."""


class EpsilonTooLargeError(LsaLabError):
    """Counterexample perturbation is not below pi(1)."""

    def __init__(
        self,
        message: str = "epsilon must be below pi(1)",
        epsilon: float | None = None,
        pi_one: float | None = None,
    ) -> None:
        """Initialize epsilon error.

        Args:
            message: Error message
            epsilon: Requested perturbation
            pi_one: Stationary mass of state 1
        """
        self.epsilon = epsilon
        self.pi_one = pi_one
        super().__init__(message, {"epsilon": epsilon, "pi_one": pi_one})


class WindowLengthMismatchError(DimMismatchError):
    """Eligibility window does not have length tau."""


class BoundViolatedError(InvariantViolationError):
    """A verified lower or upper bound failed."""

    def __init__(self, message: str, margin: float | None = None) -> None:
        """Initialize bound error.

        Args:
            message: Error message
            margin: Signed amount by which the bound failed
        """
        self.margin = margin
        super().__init__(message, {"margin": margin})


class DecompositionMismatchError(InvariantViolationError):
    """An exact error-decomposition identity failed on a trajectory."""


class DualEvaluationMismatchError(InvariantViolationError):
    """The two independent constant evaluators disagree."""

    def __init__(self, name: str, gap: float) -> None:
        """Initialize dual evaluation error.

        Args:
            name: Constant name
            gap: Relative disagreement
        """
        self.name = name
        self.gap = gap
        super().__init__(
            f"Constant '{name}' disagrees between evaluators (relative gap {gap:.3e})",
            {"name": name, "gap": gap},
        )


class ConfigError(LsaLabError):
    """Experiment configuration is invalid; maps to CLI exit code 3."""

    def __init__(self, message: str, key: str | None = None) -> None:
        """Initialize config error.

        Args:
            message: Error message
            key: Dotted path of the offending key
        """
        self.key = key
        super().__init__(message, {"key": key})


class OutputError(LsaLabError):
    """An output file could not be written; maps to CLI exit code 4."""

    def __init__(self, message: str, path: str | None = None) -> None:
        """Initialize output error.

        Args:
            message: Error message
            path: Target path
        """
        self.path = path
        super().__init__(message, {"path": path})
