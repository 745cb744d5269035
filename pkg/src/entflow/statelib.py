"""Named reference states and a small expression language for initial states.

The grammar covers linear combinations of named three-qubit states and
basis kets, written the way the perturbed superpositions in this package's
experiment configs read::

    ghz - 1e-5*i*bell1(pi) - 5.2e-4*i*bell2(pi)
    bell3(pi) + 9e-5*i*bell2(pi)
    (|000> - |111>)
    |011>

Terms are separated by + or -.  Within a term, real number literals and
the imaginary unit ``i`` multiply an atom (the ``*`` between factors is
optional).  Atoms are ``ghz``, ``bell1(angle)``, ``bell2(angle)``,
``bell3(angle)`` and ket literals ``|digits>`` whose digits are printed
with subsystem N leftmost, exactly as kets are.  Angles take ``pi``
arithmetic: ``pi``, ``-pi/2``, ``2*pi/3``, plain decimals.  A single pair
of parentheses may wrap the whole expression.

Built states are always rescaled to unit norm, so expressions can be
entered unnormalized.
"""

from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .hilbert import DimsLike, StateVector, as_dims, basis_ket

log = logging.getLogger(__name__)

QUBIT_TRIPLE = (2, 2, 2)

#: a superposition whose pre-normalization norm falls below this is rejected
DEGENERATE_NORM_TOL = 1e-14


class StateExprError(ValueError):
    """Syntax or semantic error in a state expression; carries a position."""

    def __init__(self, message: str, position: int):
        super().__init__("%s (at position %d)" % (message, position))
        self.position = position


class DegenerateStateError(ValueError):
    """The terms of an expression cancel to (numerically) zero."""


# --- AST ------------------------------------------------------------------


@dataclass(frozen=True)
class KetAtom:
    digits: tuple  # ket order (sN, ..., s1)


@dataclass(frozen=True)
class GhzAtom:
    pass


@dataclass(frozen=True)
class BellAtom:
    n: int
    theta: float


Atom = Union[KetAtom, GhzAtom, BellAtom]


@dataclass(frozen=True)
class Term:
    coefficient: complex
    atom: Atom


@dataclass(frozen=True)
class StateExpr:
    terms: tuple

    def __post_init__(self):
        if not self.terms:
            raise ValueError("state expression needs at least one term")


# --- reference states -----------------------------------------------------


def ghz() -> StateVector:
    """(|000> - |111>) / sqrt(2) on three qubits."""
    amps = np.zeros(8, dtype=np.complex128)
    amps[0] = 1.0 / math.sqrt(2.0)
    amps[7] = -1.0 / math.sqrt(2.0)
    return StateVector(amps, as_dims(QUBIT_TRIPLE), normalized=True)


def bell(n: int, theta: float) -> StateVector:
    """Two-qubit Bell state embedded in three qubits, subsystem n left out.

    bell(1, t) ~ |000> + e^{it}|110>,  bell(2, t) ~ |000> + e^{it}|101>,
    bell(3, t) ~ |000> + e^{it}|011>,  each normalized.
    """
    if n not in (1, 2, 3):
        raise ValueError("bell state index must be 1, 2 or 3, got %r" % n)
    partner = {1: (1, 1, 0), 2: (1, 0, 1), 3: (0, 1, 1)}[n]
    dims = as_dims(QUBIT_TRIPLE)
    amps = np.zeros(8, dtype=np.complex128)
    amps[0] = 1.0 / math.sqrt(2.0)
    amps[basis_index_of(partner)] = np.exp(1j * float(theta)) / math.sqrt(2.0)
    return StateVector(amps, dims, normalized=True)


def basis_index_of(digits):
    # three-qubit shortcut used by the named states
    s3, s2, s1 = digits
    return s1 + 2 * s2 + 4 * s3


# --- tokenizer ------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ket>\|[0-9]+>)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/()])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    pos: int


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise StateExprError("unexpected character %r" % text[pos], pos)
        if m.lastgroup != "ws":
            tokens.append(_Token(m.lastgroup, m.group(), pos))
        pos = m.end()
    tokens.append(_Token("eof", "", len(text)))
    return tokens


# --- parser ---------------------------------------------------------------


class _Parser:
    def __init__(self, tokens, dims: Optional[DimsLike]):
        self.tokens = tokens
        self.i = 0
        self.dims = as_dims(dims) if dims is not None else None

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def take(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, text: str) -> _Token:
        tok = self.take()
        if tok.text != text:
            raise StateExprError("expected %r, found %r" % (text, tok.text or "end of input"), tok.pos)
        return tok

    def parse(self) -> StateExpr:
        # allow one pair of parentheses around the whole expression
        if self.peek().text == "(":
            self.take()
            expr = self.parse_sum()
            self.expect(")")
        else:
            expr = self.parse_sum()
        tok = self.peek()
        if tok.kind != "eof":
            raise StateExprError("trailing input %r" % tok.text, tok.pos)
        return expr

    def parse_sum(self) -> StateExpr:
        terms = [self.parse_term()]
        while self.peek().text in ("+", "-"):
            sign = -1.0 if self.take().text == "-" else 1.0
            term = self.parse_term()
            terms.append(Term(sign * term.coefficient, term.atom))
        return StateExpr(tuple(terms))

    def parse_term(self) -> Term:
        sign = 1.0
        while self.peek().text in ("+", "-"):
            if self.take().text == "-":
                sign = -sign
        coefficient = complex(sign)
        atom = None
        expect_factor = True
        while expect_factor:
            tok = self.peek()
            if tok.kind == "number":
                coefficient *= float(self.take().text)
            elif tok.kind == "ident" and tok.text in ("i", "j"):
                self.take()
                coefficient *= 1j
            elif tok.kind == "ket" or tok.kind == "ident":
                if atom is not None:
                    raise StateExprError("a term may contain only one state atom", tok.pos)
                atom = self.parse_atom()
            else:
                raise StateExprError(
                    "expected a number, 'i' or a state atom, found %r" % (tok.text or "end of input"),
                    tok.pos,
                )
            # optional '*' continues the factor product; so does juxtaposition
            if self.peek().text == "*":
                self.take()
                expect_factor = True
            else:
                expect_factor = self.peek().kind in ("number", "ket") or (
                    self.peek().kind == "ident"
                )
        if atom is None:
            raise StateExprError("term has no state atom", self.peek().pos)
        return Term(coefficient, atom)

    def parse_atom(self) -> Atom:
        tok = self.take()
        if tok.kind == "ket":
            digits = tuple(int(ch) for ch in tok.text[1:-1])
            if self.dims is not None:
                self._check_ket(digits, tok.pos)
            return KetAtom(digits)
        if tok.text == "ghz":
            return GhzAtom()
        m = re.fullmatch(r"bell([0-9]+)", tok.text)
        if m:
            n = int(m.group(1))
            if n not in (1, 2, 3):
                raise StateExprError("bell state index must be 1, 2 or 3", tok.pos)
            self.expect("(")
            theta = self.parse_angle()
            self.expect(")")
            return BellAtom(n, theta)
        raise StateExprError("unknown atom %r" % tok.text, tok.pos)

    def _check_ket(self, digits, pos):
        dims = self.dims
        if len(digits) != len(dims):
            raise StateExprError(
                "ket has %d digits but the system has %d subsystems" % (len(digits), len(dims)),
                pos,
            )
        for offset, digit in enumerate(digits):
            n = len(dims) - offset
            if digit >= dims.dim(n):
                raise StateExprError(
                    "ket digit %d exceeds subsystem %d (dimension %d)" % (digit, n, dims.dim(n)),
                    pos,
                )

    def parse_angle(self) -> float:
        sign = 1.0
        while self.peek().text in ("+", "-"):
            if self.take().text == "-":
                sign = -sign
        value = self.parse_angle_factor()
        while True:
            tok = self.peek()
            if tok.text == "*":
                self.take()
                value *= self.parse_angle_factor()
            elif tok.text == "/":
                self.take()
                value /= self.parse_angle_factor()
            elif tok.kind in ("number", "ident"):  # juxtaposition: 2pi
                value *= self.parse_angle_factor()
            else:
                break
        return sign * value

    def parse_angle_factor(self) -> float:
        tok = self.take()
        if tok.kind == "number":
            return float(tok.text)
        if tok.kind == "ident" and tok.text == "pi":
            return math.pi
        raise StateExprError("expected a number or 'pi' in angle, found %r" % tok.text, tok.pos)


def parse_state_expr(text: str, dims: Optional[DimsLike] = None) -> StateExpr:
    """Parse an expression; ``dims`` enables ket digit validation up front."""
    return _Parser(_tokenize(text), dims).parse()


# --- rendering (round-trips through the parser) ----------------------------


def _render_scalar(c: complex) -> str:
    if c.imag == 0.0:
        return repr(c.real)
    if c.real == 0.0:
        return "%s*i" % repr(c.imag)
    # mixed coefficients cannot arise from the grammar, but render anyway
    return "(%s+%s i)" % (repr(c.real), repr(c.imag))


def _render_atom(atom: Atom) -> str:
    if isinstance(atom, KetAtom):
        return "|%s>" % "".join(str(d) for d in atom.digits)
    if isinstance(atom, GhzAtom):
        return "ghz"
    return "bell%d(%s)" % (atom.n, repr(atom.theta))


def render_state_expr(expr: StateExpr) -> str:
    parts = []
    for k, term in enumerate(expr.terms):
        c = term.coefficient
        scalar = c.imag if c.real == 0.0 and c.imag != 0.0 else c.real
        negative = scalar < 0.0
        mag = complex(-c.real, -c.imag) if negative else c
        body = "%s*%s" % (_render_scalar(mag), _render_atom(term.atom))
        if k == 0:
            parts.append("-" + body if negative else body)
        else:
            parts.append(("- " if negative else "+ ") + body)
    return " ".join(parts)


# --- building -------------------------------------------------------------


def _atom_vector(atom: Atom, dims) -> np.ndarray:
    if isinstance(atom, KetAtom):
        return basis_ket(atom.digits, dims).amplitudes
    if dims.dims != QUBIT_TRIPLE:
        raise DegenerateStateError(
            "named atom %s requires dims (2, 2, 2), got %r" % (_render_atom(atom), dims.dims)
        )
    if isinstance(atom, GhzAtom):
        return ghz().amplitudes
    return bell(atom.n, atom.theta).amplitudes


def build_state(expr: StateExpr, dims: DimsLike = QUBIT_TRIPLE) -> StateVector:
    """Evaluate an expression and normalize the resulting superposition."""
    dims = as_dims(dims)
    total = np.zeros(dims.total_dim, dtype=np.complex128)
    for term in expr.terms:
        total = total + term.coefficient * _atom_vector(term.atom, dims)
    nrm = float(np.linalg.norm(total))
    log.debug("pre-normalization norm %.17g for %r", nrm, render_state_expr(expr))
    if nrm < DEGENERATE_NORM_TOL:
        raise DegenerateStateError(
            "expression sums to (numerically) zero; norm %.3e" % nrm
        )
    return StateVector(total / nrm, dims, normalized=True)


def state_from_text(text: str, dims: DimsLike = QUBIT_TRIPLE) -> StateVector:
    """Parse then build, validating kets against ``dims``."""
    return build_state(parse_state_expr(text, dims), dims)
