class QSpecError(Exception):
    pass


class KindMismatchError(QSpecError):
    """Labels of different kinds were mixed, or a label does not fit its structure."""


class StructureMismatchError(QSpecError):
    """Two systems were combined that live over different label structures or formalisms."""


class CapabilityError(QSpecError):
    """The requested operation is not supported for this label structure / metric combination."""


class BudgetError(QSpecError):
    """A state or subset budget was exceeded."""


class ValidationError(QSpecError):
    def __init__(self, violations, name=None):
        self.violations = list(violations)
        self.name = name
        head = f"system {name!r} is invalid" if name else "invalid system"
        super().__init__(head + ": " + "; ".join(self.violations))


class ParseError(QSpecError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = f"{line}:{column}: " if line is not None else ""
        super().__init__(where + message)
