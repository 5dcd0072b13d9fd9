"""Exception hierarchy shared across the toolchain."""


class HelixError(Exception):
    """Domain failure: bad inputs, violated preconditions, unusable data.

    The CLI maps these to exit code 2.
    """


class ToolchainError(HelixError):
    """Environment failure: a required external tool is missing or broken.

    Distinct from per-item domain failures so batch runs can abort early.
    The CLI maps these to exit code 3.
    """


class MetricInputError(HelixError):
    """A similarity metric's input precondition was violated.

    The evaluator records these as "error" cells instead of scores.
    """


class GenerationExhausted(HelixError):
    """Too many build failures before reaching the requested sample count.

    The partial manifest written so far is preserved on disk.
    """

    def __init__(self, message, manifest=None):
        super().__init__(message)
        self.manifest = manifest
