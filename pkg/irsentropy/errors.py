class Error(Exception):
    pass


class ContractViolationError(Error):
    """A caller precondition does not hold.

    """

    pass


class ConstructionError(ContractViolationError):
    pass


class ConfigError(ContractViolationError):
    """Raised on config parse or schema failures. `filename` and `line`
    are included in the message when known.

    """

    def __init__(self, message, filename=None, line=None):
        super(ConfigError, self).__init__()
        self.message = message
        self.filename = filename
        self.line = line

    def __str__(self):
        if self.filename is None:
            return self.message
        elif self.line is None:
            return f'{self.filename}: {self.message}'
        else:
            return f'{self.filename}:{self.line}: {self.message}'


class ResourceBudgetError(Error):
    """A configured enumeration or support budget was exceeded.

    """

    def __init__(self, budget, limit, parameter=None):
        super(ResourceBudgetError, self).__init__()
        self.budget = budget
        self.limit = limit
        self.parameter = parameter

    def __str__(self):
        text = f"budget '{self.budget}' of {self.limit} exceeded"

        if self.parameter is not None:
            text += f' at {self.parameter}'

        return text


class QuotientOverflowError(ResourceBudgetError):

    def __init__(self, value):
        super(QuotientOverflowError, self).__init__('int64 coordinate',
                                                    2 ** 63,
                                                    f'value {value}')


class IndeterminateResultError(Error):
    pass
