"""
Duffing-Van der Pol Survey - Errors
Exception and warning classes shared by all modules
"""


class SurveyError(Exception):
    """Base class for every failure raised by the toolkit"""


class DomainError(SurveyError, ValueError):
    """Argument outside the domain of a formula"""


class NoResonance(SurveyError):
    """Target frequency is not attained in the requested domain"""


class NoSolution(SurveyError):
    """A nonlinear system has no solution in the searched region"""


class DegenerateCase(SurveyError):
    """Both the oscillating and the constant part of A0 vanish"""


class QuadratureFailure(SurveyError):
    """Numerical quadrature produced a non-finite value"""


class StepUnderflow(SurveyError):
    """Finite-difference stencil leaves the admissible rho interval"""


class TraceStall(SurveyError):
    """Continuation lost the traced branch"""


class ProbeNotFound(SurveyError):
    """A parameter-plane region could not be certified"""


class StepFailure(SurveyError):
    """The ODE integrator could not advance"""


class NonFinite(SurveyError):
    """Integration produced NaN or inf"""


class NoConvergence(SurveyError):
    """Newton iteration did not converge"""


class BudgetExhausted(SurveyError):
    """Manifold growth hit the point limit before the arclength budget"""


class FoldResolutionFailure(SurveyError):
    """Adaptive insertion could not resolve a fold of the manifold"""


class SectionAmbiguity(SurveyError):
    """A branch does not cross the reference section as expected"""


class BisectionAmbiguity(SurveyError):
    """Bisection bracket does not isolate a single verdict flip"""


class ConfigError(SurveyError):
    """Invalid run configuration"""


class SurveyWarning(UserWarning):
    """Base class for toolkit warnings"""


class NearSeparatrixWarning(SurveyWarning):
    """A generating-function root lies in the elliptic blow-up zone"""


class PreconditionWarning(SurveyWarning):
    """A formula is used outside the regime it was derived for"""


class SeedAccuracyWarning(SurveyWarning):
    """Manifold seed is not in the linear regime of the saddle"""
