"""Exception types shared across the toolkit."""


class FcltLabError(Exception):
    """Base class for all toolkit errors."""


class ParameterError(FcltLabError, ValueError):
    """Invalid parameter value or inconsistent specification."""


class WrongGroupError(ParameterError):
    """A checker was applied to a model outside its volatility group."""


class NonCausalError(FcltLabError, ValueError):
    """ARMA specification violates the causality root condition."""

    def __init__(self, min_root_modulus: float):
        self.min_root_modulus = float(min_root_modulus)
        super().__init__(
            f"non-causal ARMA spec: autoregressive polynomial has a root of "
            f"modulus {self.min_root_modulus:.12g} <= 1"
        )


class DivergenceError(FcltLabError, ArithmeticError):
    """The volatility recursion produced a non-finite or non-positive state."""

    def __init__(self, step: int, detail: str = ""):
        self.step = int(step)
        msg = f"volatility recursion diverged at step t={self.step}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class QuadratureError(FcltLabError, ArithmeticError):
    """Adaptive quadrature did not reach the requested accuracy."""

    def __init__(self, achieved_rel_tol: float, detail: str = ""):
        self.achieved_rel_tol = float(achieved_rel_tol)
        msg = f"quadrature accuracy not reached (achieved rel. tol {self.achieved_rel_tol:.3g})"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class NumericsError(FcltLabError, ArithmeticError):
    """A numerical routine (root finding, eigensolver) failed to converge."""


class SingularityError(FcltLabError, ArithmeticError):
    """A density or covariance needed by a formula is zero or degenerate."""


class RefusalError(FcltLabError, RuntimeError):
    """An experiment was refused because its preconditions do not hold.

    Carries the condition reports (or a textual reason) explaining the refusal.
    """

    def __init__(self, reason: str, reports=None):
        self.reason = reason
        self.reports = list(reports) if reports is not None else []
        super().__init__(reason)
