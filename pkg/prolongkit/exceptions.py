class ProlongKitError(Exception):
    exit_code = 1

    def __str__(self) -> str:
        result = self.__class__.__name__

        if self.args:
            result += f": {self.args[0]}"

        return result


class InputError(ProlongKitError):
    """Malformed input: bad expressions, files, charts or points."""

    exit_code = 1


class RejectionError(ProlongKitError):
    """Well formed input that the geometry rejects."""

    exit_code = 2


class ExpressionSyntaxError(InputError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class UnknownIdentifierError(InputError):
    def __init__(self, name: str):
        super().__init__(f"unknown identifier {name!r}")
        self.name = name


class MissingCoordinateError(InputError):
    def __init__(self, names: list[str]):
        super().__init__(f"no value for coordinate(s) {', '.join(names)}")
        self.names = names


class ChartError(InputError):
    pass


class ChartMismatchError(ChartError):
    pass


class OffSurfaceError(InputError):
    def __init__(self, message: str, residual: float = 0.0):
        super().__init__(message)
        self.residual = residual


class InputFileError(InputError):
    pass


class UnknownModelError(InputError):
    pass


class InsufficientSmoothnessError(InputError):
    pass


class DomainError(RejectionError):
    pass


class DegenerateBasisError(RejectionError):
    pass


class NonRegularPointError(RejectionError):
    pass


class ProjectionError(RejectionError):
    pass


class DegeneratePencilError(RejectionError):
    pass


class SplittingError(RejectionError):
    def __init__(self, message: str, condition_number: float = float("inf")):
        super().__init__(f"{message} (condition number {condition_number:.3e})")
        self.condition_number = condition_number


class NormalFormError(RejectionError):
    pass


class EmptyChartError(RejectionError):
    pass


class OverlapError(RejectionError):
    pass


class SingularPointError(RejectionError):
    pass


class NonIntegralPlaneError(RejectionError):
    pass


class MeshError(RejectionError):
    pass


class NonAdaptedFrameError(RejectionError):
    pass


class CauchyRiemannError(RejectionError):
    def __init__(self, residual: float):
        super().__init__(f"Cauchy-Riemann residual {residual:.3e} exceeds tolerance")
        self.residual = residual


class PathDependenceError(RejectionError):
    def __init__(self, difference: float):
        super().__init__(f"path integrals differ by {difference:.3e}")
        self.difference = difference
