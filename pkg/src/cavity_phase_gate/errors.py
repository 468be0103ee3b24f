"""Exception hierarchy; CLI exit codes are attached to the classes."""


class GateSimError(Exception):
    exit_code = 3


class ParameterError(GateSimError, ValueError):
    """Invalid physical parameters or configuration values."""

    exit_code = 2


class ConfigError(ParameterError):
    exit_code = 2


class DimensionLimitError(GateSimError):
    exit_code = 3


class EncodingError(GateSimError, ValueError):
    exit_code = 2


class NumericalError(GateSimError, ArithmeticError):
    """Integrator failure, norm/trace drift or corrupted fidelity."""

    exit_code = 3
