"""Exception types shared across the package."""


class LiftLabError(Exception):
    """Base class for all liftlab errors."""


class InvalidInput(LiftLabError):
    """Arguments violate a documented precondition (shape, finiteness, domain)."""


class ConstantRankViolation(LiftLabError):
    """A defining function's Jacobian dropped rank against its declared codimension."""


class RetractionFailure(LiftLabError):
    """Gauss-Newton projection back onto the manifold did not converge."""


class NotCoexact(LiftLabError):
    """A costate vector is not orthogonal to the image of the first derivative map."""


class NotSubmersion(LiftLabError):
    """The inner map of a composition has a rank-deficient differential."""


class NoDegeneracy(LiftLabError):
    """Degenerate-direction sequences requested at a point where none exist."""


class NoPathology(LiftLabError):
    """A pathological downstairs sequence requested where the lift is open."""


class WitnessSearchFailed(LiftLabError):
    """No violating costate found although the property verdict demanded one."""


class InvalidWitness(LiftLabError):
    """Witness synthesis called with a costate that fails its precondition."""


class SamplerExhausted(LiftLabError):
    """A feasible-point sampler could not produce points near the requested center."""


class NotConverged(LiftLabError):
    """Local solver hit its iteration budget; carries the best iterate found."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class NoData(LiftLabError):
    """Report lacks the task data needed for the requested export."""
