"""Exception hierarchy. The CLI maps each class onto an exit code."""


class MorfoError(Exception):
    exit_code = 1


class ConfigError(MorfoError):
    exit_code = 1


class DataError(MorfoError):
    exit_code = 2


class NumericError(MorfoError):
    exit_code = 3
