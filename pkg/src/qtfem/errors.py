"""Exception types raised by qtfem."""


class QtfemError(Exception):
    """Base class for all qtfem errors."""


class InvalidDomainError(QtfemError, ValueError):
    pass


class DegenerateGeometryError(QtfemError, ValueError):
    pass


class TreatmentNotApplicableError(QtfemError):
    """The requested element treatment cannot handle this cell.

    Raised e.g. by the conforming transition element when an edge carries
    more than one hanging node.
    """

    def __init__(self, message, cell=None):
        super().__init__(message)
        self.cell = cell


class SchemeMismatchError(QtfemError, ValueError):
    pass


class UnsupportedRuleError(QtfemError, ValueError):
    pass


class NearSingularEvaluationError(QtfemError, ValueError):
    pass


class ModeSelectionError(QtfemError):
    """Eigen-mode selection of the scaled boundary solution failed."""

    def __init__(self, message, dump_path=None):
        super().__init__(message)
        self.dump_path = dump_path


class NumericalFailureError(QtfemError):
    pass


class IncompleteBoundaryConditionError(QtfemError, KeyError):
    def __init__(self, node):
        super().__init__(f"no prescribed value for boundary node {node}")
        self.node = node

    def __str__(self):
        return self.args[0]


class SingularSystemError(QtfemError):
    def __init__(self, message, null_vector=None):
        super().__init__(message)
        self.null_vector = null_vector
