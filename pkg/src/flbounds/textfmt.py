"""Line-oriented text format for describing inputs on the command line.

Grammar (one directive per line, ``#`` starts a comment, blank lines are
skipped):

    atom <label> <weight>        # atom of the primary measure P
    ref <label> <weight>         # atom of the reference measure Q
    joint <row> <col> <weight>   # entry of a joint measure
    kernel <in> <out> <prob>     # entry of a stochastic kernel
    group <d> [<d2> ...]         # cyclic group factors for a channel
    bsc <p>                      # binary symmetric channel shorthand
    bpsk <sigma_y2> <sigma_z2>   # Gaussian wire-tap pair shorthand

Labels are plain tokens (no whitespace). Numeric labels are kept as
strings except inside ``joint``/``kernel`` rows for group channels, where
they are parsed as integers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, TextIO

import numpy as np

from .measures import (
    ConditionalKernel,
    DiscreteMeasure,
    JointMeasure,
    MeasureError,
)


class ParseError(ValueError):
    """Malformed input file; carries the offending line number."""

    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


@dataclass
class ParsedInput:
    """Everything a single input file can declare."""

    atoms: dict[str, float] = field(default_factory=dict)
    refs: dict[str, float] = field(default_factory=dict)
    joint_entries: dict[tuple[str, str], float] = field(default_factory=dict)
    kernel_entries: dict[tuple[str, str], float] = field(default_factory=dict)
    group: Optional[tuple[int, ...]] = None
    bsc: Optional[float] = None
    bpsk: Optional[tuple[float, float]] = None

    def measure(self) -> Optional[DiscreteMeasure]:
        if not self.atoms:
            return None
        return DiscreteMeasure.from_pairs(self.atoms.items())

    def reference(self) -> Optional[DiscreteMeasure]:
        if not self.refs:
            return None
        return DiscreteMeasure.from_pairs(self.refs.items())

    def joint(self) -> Optional[JointMeasure]:
        if not self.joint_entries:
            return None
        rows = sorted({r for r, _ in self.joint_entries}, key=_label_key)
        cols = sorted({c for _, c in self.joint_entries}, key=_label_key)
        w = np.zeros((len(rows), len(cols)))
        for (r, c), v in self.joint_entries.items():
            w[rows.index(r), cols.index(c)] = v
        return JointMeasure.from_matrix(rows, cols, w)

    def kernel(self) -> Optional[ConditionalKernel]:
        if not self.kernel_entries:
            return None
        ins = sorted({a for a, _ in self.kernel_entries}, key=_label_key)
        outs = sorted({b for _, b in self.kernel_entries}, key=_label_key)
        m = np.zeros((len(ins), len(outs)))
        for (a, b), v in self.kernel_entries.items():
            m[ins.index(a), outs.index(b)] = v
        return ConditionalKernel(ins, outs, m)


def _label_key(label: str):
    try:
        return (0, float(label), "")
    except ValueError:
        return (1, 0.0, label)


def _number(token: str, lineno: int, what: str) -> float:
    try:
        value = float(token)
    except ValueError:
        raise ParseError(lineno, f"{what} is not a number: {token!r}") from None
    if not np.isfinite(value):
        raise ParseError(lineno, f"{what} must be finite: {token!r}")
    return value


def parse_input(stream: TextIO) -> ParsedInput:
    out = ParsedInput()
    for lineno, raw in enumerate(stream, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        word, args = tokens[0], tokens[1:]
        if word == "atom" or word == "ref":
            if len(args) != 2:
                raise ParseError(lineno, f"{word} needs <label> <weight>")
            target = out.atoms if word == "atom" else out.refs
            if args[0] in target:
                raise ParseError(lineno, f"duplicate {word} label {args[0]!r}")
            target[args[0]] = _number(args[1], lineno, "weight")
        elif word == "joint":
            if len(args) != 3:
                raise ParseError(lineno, "joint needs <row> <col> <weight>")
            key = (args[0], args[1])
            if key in out.joint_entries:
                raise ParseError(lineno, f"duplicate joint cell {key!r}")
            out.joint_entries[key] = _number(args[2], lineno, "weight")
        elif word == "kernel":
            if len(args) != 3:
                raise ParseError(lineno, "kernel needs <input> <output> <prob>")
            key = (args[0], args[1])
            if key in out.kernel_entries:
                raise ParseError(lineno, f"duplicate kernel cell {key!r}")
            out.kernel_entries[key] = _number(args[2], lineno, "probability")
        elif word == "group":
            if not args:
                raise ParseError(lineno, "group needs at least one factor")
            try:
                out.group = tuple(int(a) for a in args)
            except ValueError:
                raise ParseError(lineno, "group factors must be integers") from None
        elif word == "bsc":
            if len(args) != 1:
                raise ParseError(lineno, "bsc needs <crossover>")
            out.bsc = _number(args[0], lineno, "crossover")
        elif word == "bpsk":
            if len(args) != 2:
                raise ParseError(lineno, "bpsk needs <sigma_y2> <sigma_z2>")
            out.bpsk = (
                _number(args[0], lineno, "sigma_y2"),
                _number(args[1], lineno, "sigma_z2"),
            )
        else:
            raise ParseError(lineno, f"unknown directive {word!r}")
    return out


def load_input(path: str) -> ParsedInput:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return parse_input(fh)
    except OSError as exc:
        raise ParseError(0, f"cannot read {path}: {exc.strerror}") from None
    except MeasureError as exc:
        raise ParseError(0, str(exc)) from None
