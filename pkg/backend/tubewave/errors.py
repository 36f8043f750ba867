"""
Exception hierarchy for tubewave.

Every error carries the process exit code main.py reports for it:
2 for bad input, 3 when a solve cannot be carried out, 4 when a finished
solve fails one of its acceptance gates.
"""


class TubeWaveError(Exception):
    exit_code = 1


class ConfigError(TubeWaveError):
    exit_code = 2


class SolverError(TubeWaveError):
    exit_code = 3


class GateError(TubeWaveError):
    exit_code = 4
