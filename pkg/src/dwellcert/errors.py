"""Exception type shared by every module of the package."""


class DwellCertError(Exception):
    """Raised when an operation cannot produce its result.

    ``code`` is a short stable identifier (``"dim-mismatch"``,
    ``"no-contraction-power"``, ...) that callers and the command line
    front end use to report the failure.
    """

    def __init__(self, code: str, message: str = ""):
        self.code = code
        self.message = message or code
        super().__init__(f"{code}: {self.message}" if message else code)
