"""Exception hierarchy for fewcopy."""


class FewCopyError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatch(FewCopyError, ValueError):
    pass


class NonRealPhase(FewCopyError, ValueError):
    """A Pauli product picked up a factor of +i or -i."""


class PauliParseError(FewCopyError, ValueError):
    pass


class NotAProjector(FewCopyError, ValueError):
    pass


class OutOfRange(FewCopyError, ValueError):
    pass


class InvalidState(FewCopyError, ValueError):
    pass


class NonCommutingGenerators(FewCopyError, ValueError):
    pass


class DependentGenerators(FewCopyError, ValueError):
    pass


class ScheduleExhausted(FewCopyError, IndexError):
    pass


class EmptyDecomposition(FewCopyError, ValueError):
    pass


class NotAGroup(FewCopyError, ValueError):
    pass


class IncompatibleSupports(FewCopyError, ValueError):
    pass


class DomainError(FewCopyError, ValueError):
    pass


class MismatchedSet(FewCopyError, ValueError):
    pass


class WrongProvenance(FewCopyError, ValueError):
    pass


class EmptyRecord(FewCopyError, ValueError):
    pass


class UnknownSettingId(FewCopyError, ValueError):
    pass


class NonBinaryOutcome(FewCopyError, ValueError):
    pass


class ConfigError(FewCopyError, ValueError):
    """Malformed input file or command-line configuration."""
