"""Instrumented binary32 arithmetic layer.

Every arithmetic and bit operation performed by the constant-time kernels is
routed through the helpers in this module.  Each helper does two things:

* computes its result in IEEE 754 binary32 (one rounding per operation,
  round-to-nearest-even; no fused multiply-add is ever introduced, which is
  the pinned behaviour for the whole project), and
* appends one opcode tag to the active recording context, if there is one.

Recording uses a ``contextvars.ContextVar`` so concurrent evaluations in
different threads or tasks never share a trace buffer.  When no recording is
active the per-op overhead is a single context-variable read.

Values flowing through this layer are ``numpy.float32`` / ``numpy.uint32``
scalars, or arrays of the same dtypes.  Array inputs follow the exact same
code path and emit the exact same opcode sequence as scalars; elementwise
results are bit-identical to repeated scalar calls.
"""

from __future__ import annotations

import contextvars
from contextlib import contextmanager
from typing import Iterator

import numpy as np

__all__ = [
    "OP_ADD", "OP_MUL", "OP_DIV", "OP_NEG", "OP_CMP", "OP_MASK", "OP_SELECT",
    "OP_AND", "OP_OR", "OP_NOT", "OP_BITCAST", "OP_BRANCH",
    "CONTROL_FLOW_TAGS", "ARITHMETIC_TAGS",
    "recording",
    "f_add", "f_mul", "f_div", "f_neg", "f_gt", "f_lt",
    "to_bits", "from_bits", "u_and", "u_or", "u_not", "bool_to_mask",
    "cond_move", "take_branch",
    "U32_ALL_ONES", "U32_SIGN_BIT", "U32_ABS_MASK",
]

# Opcode vocabulary.  BRANCH is the only control-flow tag; it never appears
# in the trace of a constant-time kernel.
OP_ADD = "ADD"
OP_MUL = "MUL"
OP_DIV = "DIV"
OP_NEG = "NEG"
OP_CMP = "CMP"
OP_MASK = "MASK"
OP_SELECT = "SELECT"
OP_AND = "AND"
OP_OR = "OR"
OP_NOT = "NOT"
OP_BITCAST = "BITCAST"
OP_BRANCH = "BRANCH"

CONTROL_FLOW_TAGS = frozenset({OP_BRANCH})
ARITHMETIC_TAGS = frozenset({
    OP_ADD, OP_MUL, OP_DIV, OP_NEG, OP_CMP, OP_MASK, OP_SELECT,
    OP_AND, OP_OR, OP_NOT, OP_BITCAST,
})

U32_ALL_ONES = np.uint32(0xFFFFFFFF)
U32_SIGN_BIT = np.uint32(0x80000000)
U32_ABS_MASK = np.uint32(0x7FFFFFFF)

_recorder: contextvars.ContextVar[list | None] = contextvars.ContextVar(
    "ctact_op_recorder", default=None
)


def _emit(tag: str) -> None:
    buf = _recorder.get()
    if buf is not None:
        buf.append(tag)


@contextmanager
def recording() -> Iterator[list]:
    """Collect opcode tags emitted while the context is active.

    Yields the (initially empty) list that receives the tags.  Contexts may
    nest; the inner context shadows the outer one until it exits.
    """
    buf: list = []
    token = _recorder.set(buf)
    try:
        yield buf
    finally:
        _recorder.reset(token)


# -- binary32 arithmetic ----------------------------------------------------

def f_add(a, b):
    _emit(OP_ADD)
    return a + b


def f_mul(a, b):
    _emit(OP_MUL)
    return a * b


def f_div(a, b):
    _emit(OP_DIV)
    return a / b


def f_neg(a):
    _emit(OP_NEG)
    return -a


def f_gt(a, b):
    _emit(OP_CMP)
    return a > b


def f_lt(a, b):
    _emit(OP_CMP)
    return a < b


# -- bit-level operations ---------------------------------------------------

def to_bits(x):
    """Reinterpret a binary32 value as its 32-bit unsigned encoding."""
    _emit(OP_BITCAST)
    return x.view(np.uint32)


def from_bits(u):
    """Reinterpret a 32-bit unsigned word as the binary32 value it encodes."""
    _emit(OP_BITCAST)
    return u.view(np.float32)


def u_and(a, b):
    _emit(OP_AND)
    return a & b


def u_or(a, b):
    _emit(OP_OR)
    return a | b


def u_not(a):
    _emit(OP_NOT)
    return ~a


def bool_to_mask(flag):
    """Spread a 0-or-1 comparison result into a 32-bit lane mask.

    Equivalent to the two's-complement negation of the 0/1 word: the result
    is 0x00000000 or 0xFFFFFFFF.  Implemented as a wraparound multiply by
    all-ones, which is the same function with no conditional control flow.
    """
    _emit(OP_MASK)
    return flag.astype(np.uint32) * U32_ALL_ONES


def cond_move(condition, if_true, if_false):
    """Predicated move: the hardware-style conditional select.

    Used only by the *unprotected* reference models (a compiler lowers a
    short ternary to a predicated move).  Constant-time kernels use explicit
    mask arithmetic instead.
    """
    _emit(OP_SELECT)
    return np.where(condition, if_true, if_false)


def take_branch() -> None:
    """Record a data-dependent branch decision (control flow).

    Only the unprotected reference models emit this tag.  Its presence in a
    protected trace is a defect by definition.
    """
    _emit(OP_BRANCH)
