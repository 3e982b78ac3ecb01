class DegenerateChannelError(ArithmeticError):
    """A rate quantity is undefined, e.g. an error rate over zero gain."""
