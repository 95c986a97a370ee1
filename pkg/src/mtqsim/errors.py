"""Error types shared across the package.

ConfigError covers invalid experiment configuration (bad parameter values,
missing referenced files, malformed attack specs). DataError covers malformed
content inside data files (topology edge lists, calibration CSV, circuit
text). The CLI maps ConfigError to exit code 2 and DataError to exit code 3.
"""


class ConfigError(Exception):
    """Invalid experiment configuration."""


class DataError(Exception):
    """Malformed data file content."""
