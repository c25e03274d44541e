"""Exception hierarchy shared by the graph, property and flow modules."""


class NewtonGraphsError(Exception):
    """Base class for all library errors."""

    code = "error"

    def to_dict(self):
        return {"error": self.code, "message": str(self)}


# -- embedded graphs -------------------------------------------------------

class GraphError(NewtonGraphsError):
    code = "graph_error"


class MalformedRotation(GraphError):
    code = "malformed_rotation"


class NotConnected(GraphError):
    code = "not_connected"


class NotToroidal(GraphError):
    code = "not_toroidal"


class LoopObstruction(GraphError):
    code = "loop_obstruction"


class PreconditionFailed(GraphError):
    code = "precondition_failed"


# -- Newton properties -----------------------------------------------------

class OrderMismatch(NewtonGraphsError):
    code = "order_mismatch"


class StructureMismatch(NewtonGraphsError):
    code = "structure_mismatch"


class HallFails(NewtonGraphsError):
    code = "hall_fails"


class ForcedPairNotIncident(NewtonGraphsError):
    code = "forced_pair_not_incident"


# -- elliptic functions ----------------------------------------------------

class EllipticError(NewtonGraphsError):
    code = "elliptic_error"


class InvalidLattice(EllipticError):
    code = "invalid_lattice"


class PoleAtLattice(EllipticError):
    code = "pole_at_lattice"


class ZeroPoleCollision(EllipticError):
    code = "zero_pole_collision"


class ConstraintUnsatisfiable(EllipticError):
    code = "constraint_unsatisfiable"


class TooCloseToSingularity(EllipticError):
    code = "too_close_to_singularity"


class DegenerateFunction(EllipticError):
    code = "degenerate_function"


# -- flows -----------------------------------------------------------------

class FlowError(NewtonGraphsError):
    code = "flow_error"


class StepSizeUnderflow(FlowError):
    code = "step_size_underflow"

    def __init__(self, message, location=None):
        super().__init__(message)
        self.location = location


class SaddleConnection(FlowError):
    code = "saddle_connection"

    def __init__(self, message, saddle=None, target=None, distance=None):
        super().__init__(message)
        self.saddle = saddle
        self.target = target
        self.distance = distance


class NonConvergence(FlowError):
    code = "non_convergence"


class AngleCollision(FlowError):
    code = "angle_collision"
