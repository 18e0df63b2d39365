"""Exception types shared across the package."""


class DegenerateGeometryError(ValueError):
    """A geometric construction collapsed (coincident points, zero-length direction)."""


class SpecValidationError(ValueError):
    """A relation spec or reference mode is structurally unusable."""


class TemplateValidationError(ValueError):
    """A template failed validation; the message lists the violations."""


class FormatError(ValueError):
    """An input file could not be parsed into the expected structure."""


class InfeasiblePlantError(RuntimeError):
    """A planted instance could not be constructed from the template's fuzzy sets."""
