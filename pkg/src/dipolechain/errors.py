"""Exception types raised by the simulation kernel."""


class DipoleChainError(Exception):
    """Base class for every error raised by this package."""


class InvalidChainError(DipoleChainError, ValueError):
    """Chain builder arguments are out of range (fewer than 2 nodes, negative rise)."""


class InvalidAlternationError(InvalidChainError):
    """Alternation parameter outside the open interval (0, 2)."""


class InvalidPairError(DipoleChainError, ValueError):
    """Pair geometry requested for i == j or an out-of-range node index."""


class DegenerateGeometryError(DipoleChainError, ValueError):
    """Two nodes coincide, so the dipolar coupling diverges."""


class InvalidWindowError(DipoleChainError, ValueError):
    """Neighbor window M outside 1..N-1."""


class InvalidMatrixError(DipoleChainError, ValueError):
    """Matrix handed to the spectral solver is not symmetric (or failed its checks)."""


class UndefinedRatioError(DipoleChainError, ArithmeticError):
    """Reference transfer integral vanishes, e.g. at the magic field angle."""


class SizeLimitError(DipoleChainError, ValueError):
    """Full-space reference requested for more spins than the dense solver allows."""


class ConfigError(DipoleChainError, ValueError):
    """Command-line or config-file input is missing or inconsistent."""
