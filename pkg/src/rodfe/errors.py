"""Exception types raised by the rod library."""


class RodError(Exception):
    """Base class for all library errors."""


class DegenerateQuaternion(RodError):
    """Quaternion norm too small to define a rotation."""


class NotARotation(RodError):
    """Matrix is not orthonormal with determinant +1."""


class CutLocus(RodError):
    """Rotation angle too close to pi for a well-defined logarithm."""


class ConstrainedLaw(RodError):
    """Operation requires finite stiffness but the law encodes constraints."""


class OutOfElement(RodError):
    """Evaluation point lies outside the element interval."""


class UnsupportedOrder(RodError):
    """Requested quadrature order is not available."""


class DegenerateTangent(RodError):
    """Reference tangent length is (numerically) zero."""


class MisplacedPointLoad(RodError):
    """Point loads must sit at element boundaries."""


class NonConvergence(RodError):
    """Newton iteration exceeded the iteration budget."""

    def __init__(self, increment, iterations, residual_norm=None):
        self.increment = increment
        self.iterations = iterations
        self.residual_norm = residual_norm
        super().__init__(
            f"no convergence in increment {increment} after {iterations} iterations"
            + (f" (|f| = {residual_norm:.3e})" if residual_norm is not None else "")
        )


class SingularJacobian(RodError):
    """Linear solve failed inside a Newton iteration."""


class InsufficientHistory(RodError):
    """Convergence-rate estimate needs at least three iterates."""


class SearchExhausted(RodError):
    """Load-increment search exceeded its cap without convergence."""


class SchemaMismatch(RodError):
    """CSV columns do not match the expected schema."""

    def __init__(self, missing, path=None):
        self.missing = list(missing)
        self.path = path
        where = f" in {path}" if path else ""
        super().__init__(f"missing columns{where}: {', '.join(self.missing)}")
