"""Error taxonomy shared by every layer of the engine."""


class MonomializeError(Exception):
    """Base class. `exit_code` is what the command line maps this error to."""

    exit_code = 2


class RankMismatch(MonomializeError):
    pass


class TruncationExhausted(MonomializeError):
    exit_code = 3


class NotAUnit(MonomializeError):
    pass


class FieldExtensionRequired(MonomializeError):
    exit_code = 4

    def __init__(self, message, modulus=None):
        super().__init__(message)
        # cyclotomic modulus that would contain the missing root, when known
        self.modulus = modulus


class InvalidOrder(MonomializeError):
    pass


class NotDependent(MonomializeError):
    pass


class NotIndependent(MonomializeError):
    pass


class NotRepresentable(MonomializeError):
    pass


class RankDeficient(MonomializeError):
    pass


class InstanceTooLarge(MonomializeError):
    pass


class InvalidPreparedForm(MonomializeError):
    def __init__(self, clause, detail=""):
        super().__init__(f"{clause}: {detail}" if detail else clause)
        self.clause = clause


class InvalidTransformation(MonomializeError):
    pass


class NotApplicable(MonomializeError):
    pass


class IterationLimit(MonomializeError):
    exit_code = 5


class VerificationFailed(MonomializeError):
    exit_code = 6

    def __init__(self, stage, reason):
        super().__init__(f"stage {stage}: {reason}")
        self.stage = stage
        self.reason = reason
