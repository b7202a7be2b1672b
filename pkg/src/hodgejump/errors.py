"""Shared exception types with CLI exit-code semantics."""


class ValidationFailure(ValueError):
    """Input data failed validation (manifest, spec, or point); exit code 2."""


class InternalInvariantError(RuntimeError):
    """A computation violated one of its own invariants; exit code 3."""
