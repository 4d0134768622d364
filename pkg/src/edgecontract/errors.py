"""Exception types shared across the simulator."""


class ConfigError(ValueError):
    """A scenario, topology, or score-model configuration value is invalid."""


class AdmissibilityError(ValueError):
    """Contract parameters fall outside the region where the closed form applies."""


class EmptyFeasibleSet(RuntimeError):
    """No candidate satisfies the feasibility constraints."""


class InstanceTooLarge(RuntimeError):
    """Brute-force enumeration would exceed the safety guard."""


class DomainError(ValueError):
    """A performance score sits at or below the log threshold."""


class MissingLabel(KeyError):
    """A replayed label file has no entry for the requested task."""


class TransportError(RuntimeError):
    """The live assessor endpoint could not be reached."""


class MalformedResponse(ValueError):
    """The live assessor answered without a usable difficulty field."""
