"""Running SMT-LIB scripts through an external solver process.

One process (group) per query: the script, ``(get-model)`` and ``(exit)`` are piped in
and the answer read back.  A session can be cancelled from another thread,
which kills the child process.
"""

from __future__ import annotations

import os
import shlex
import shutil
import signal
import subprocess
import threading
import time
from dataclasses import dataclass

ENV_VAR = "HRMV_SOLVER"
DEFAULT_ARGS = {"z3": ["-in", "-smt2"], "cvc5": ["--lang=smt2", "--produce-models"], "yices-smt2": [],
                "mathsat": []}


class SolverError(Exception):
    pass


def solver_command(spec: str | None = None) -> list[str]:
    """Command line for ``spec`` (or ``$HRMV_SOLVER``, or ``z3``).

    A bare known solver name or path gets its stdin/SMT-LIB flags appended.
    """
    spec = spec or os.environ.get(ENV_VAR) or "z3"
    argv = shlex.split(spec)
    if not argv:
        raise SolverError("empty solver command")
    exe = shutil.which(argv[0])
    if exe is None:
        raise SolverError(f"solver executable not found: {argv[0]}")
    base = os.path.basename(argv[0])
    if len(argv) == 1 and base in DEFAULT_ARGS:
        argv += DEFAULT_ARGS[base]
    return [exe, *argv[1:]]


@dataclass(frozen=True)
class Answer:
    status: str          # "sat" | "unsat" | "unknown"
    model: str = ""
    seconds: float = 0.0


class Cancelled(Exception):
    pass


class Session:
    """Shared cancellation state for the queries of one check."""

    def __init__(self, command: list[str], deadline: float | None = None):
        self.command = command
        self.deadline = deadline
        self.cancel = threading.Event()
        self._lock = threading.Lock()
        self._procs: set = set()

    def stop(self) -> None:
        self.cancel.set()
        with self._lock:
            for p in list(self._procs):
                _kill(p)

    def remaining(self) -> float | None:
        return None if self.deadline is None else self.deadline - time.monotonic()

    def run(self, script: str) -> Answer:
        if self.cancel.is_set():
            raise Cancelled()
        left = self.remaining()
        if left is not None and left <= 0:
            return Answer("unknown")
        start = time.monotonic()
        try:
            proc = subprocess.Popen(self.command, stdin=subprocess.PIPE, stdout=subprocess.PIPE,
                                    stderr=subprocess.PIPE, text=True, start_new_session=True)
        except OSError as exc:
            raise SolverError(f"cannot start solver: {exc}") from None
        with self._lock:
            self._procs.add(proc)
        result: dict = {}

        def talk():
            try:
                result["out"] = proc.communicate(script + "(get-model)\n(exit)\n")
            except Exception as exc:  # broken pipe after a kill
                result["err"] = exc

        t = threading.Thread(target=talk, daemon=True)
        t.start()
        try:
            while t.is_alive():
                t.join(0.05)
                left = self.remaining()
                if self.cancel.is_set() or (left is not None and left <= 0):
                    _kill(proc)
                    t.join()
                    if self.cancel.is_set():
                        raise Cancelled()
                    return Answer("unknown", "", time.monotonic() - start)
        finally:
            with self._lock:
                self._procs.discard(proc)
        if "out" not in result:
            if self.cancel.is_set():
                raise Cancelled()
            raise SolverError(f"solver communication failed: {result.get('err')}")
        out, err = result["out"]
        return _answer(out, err, time.monotonic() - start)


def _kill(p: subprocess.Popen) -> None:
    """Kill the solver and anything it spawned (wrapper scripts)."""
    try:
        os.killpg(p.pid, signal.SIGKILL)
    except OSError:
        try:
            p.kill()
        except OSError:
            pass


def _answer(out: str, err: str, secs: float) -> Answer:
    text = out.lstrip()
    first, _, rest = text.partition("\n")
    first = first.strip()
    if first in ("sat", "unsat", "unknown"):
        return Answer(first, rest if first == "sat" else "", secs)
    detail = (first or err.strip() or "no output")[:500]
    raise SolverError(f"unexpected solver output: {detail}")
