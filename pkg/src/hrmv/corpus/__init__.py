"""Bundled example programs and the generator for the filter-loop family."""

from __future__ import annotations

from importlib import resources
from pathlib import Path

FILTER = """\
node Filter (in1 : bool; in2 : real)
returns (out1 : bool; out2 : real);
(*@contract
  assume in1;
  assume -1.0 <= in2 and in2 <= 1.0;
  guarantee out1;
  guarantee -1.0 <= out2 and out2 <= 1.0;
*)
var sum, D1, D2 : real;
let
  out1 = in1;
  sum = 0.0582 * (if in1 then in2 else -in2) - (-1.49 * D1) - 0.881 * D2;
  D1 = 0.0 -> pre sum;
  D2 = 0.0 -> pre D1;
  out2 = (sum - D2) / 1.25;
tel
"""


def nfilters(n: int) -> str:
    """``n`` second-order filters in a loop; the bool ring is broken by one register."""
    if n < 2:
        raise ValueError("the filter loop needs at least two filters")
    bs = ", ".join(f"b{k}" for k in range(1, n + 1))
    ss = ", ".join(f"s{k}" for k in range(1, n))
    lines = [
        f"-- {n} filters in a feedback loop (generated).",
        FILTER,
        "node Toplevel (in : real)",
        "returns (out : real);",
        "(*@contract",
        "  assume -1.0 <= in and in <= 1.0;",
        "  guarantee -1.0 <= out and out <= 1.0;",
        "*)",
        f"var {bs}, pre_b1 : bool; {ss} : real;",
        "let",
        f"  b1, s1 = Filter(b{n}, in);",
        "  pre_b1 = true -> pre b1;",
        "  b2, s2 = Filter(pre_b1, s1);" if n > 2 else "  b2, out = Filter(pre_b1, s1);",
    ]
    for k in range(3, n + 1):
        dst = "out" if k == n else f"s{k}"
        lines.append(f"  b{k}, {dst} = Filter(b{k - 1}, s{k - 1});")
    lines.append("tel")
    return "\n".join(lines) + "\n"


def path(name: str) -> Path:
    """Filesystem path of a bundled ``.lus`` file (``name`` with or without suffix)."""
    if not name.endswith(".lus"):
        name += ".lus"
    return Path(str(resources.files(__name__).joinpath(name)))


def names() -> list[str]:
    return sorted(p.name[:-4] for p in Path(str(resources.files(__name__))).glob("*.lus"))


def text(name: str) -> str:
    return path(name).read_text(encoding="utf-8")
