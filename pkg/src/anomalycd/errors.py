"""Exception types shared across the package."""


class AnomalyCDError(Exception):
    """Base class for all errors raised by this package."""


class SceneError(AnomalyCDError):
    """Invalid scene directory, manifest, or raster stack."""


class TilingError(AnomalyCDError):
    """Tile plan / stitch coverage violation."""


class CacheError(AnomalyCDError):
    """Corrupt or malformed embedding cache file."""


class ConfigError(AnomalyCDError):
    """Out-of-range or unknown run configuration value."""
