"""Symbolic model checking of contract obligations with an external SMT solver."""

from .engine import (CheckResult, EngineConfig, EngineError, Falsified, Unknown, Valid, bmc, cancel_all, check,
                     check_obligation, kinduction, replay, strengthen)
from .smtlib import emit_smt, parse_model
from .solver import SolverError, solver_command
from .ts import EncodeError, TransitionSystem, encode
