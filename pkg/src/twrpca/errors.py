"""Exception types shared across the toolkit."""


class InputError(ValueError):
    """Invalid user-supplied value: bad config key, shape mismatch, parameter
    outside its domain."""


class NumericalError(RuntimeError):
    """A numerical routine failed: SVD or factorization breakdown, divergence,
    or a 1-D minimizer that did not converge within its iteration budget."""
