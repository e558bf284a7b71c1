"""Exact multivariate polynomials over the rationals.

A :class:`MultiPoly` is a sparse map from exponent vectors to
:class:`fractions.Fraction` coefficients over an ordered tuple of declared
variable names.  The monomial order is graded lexicographic where a variable
declared later is more significant (``vars=("l1", "l2")`` means ``l1 < l2``).

Text form is ``coeff*var^exp*...`` terms joined by `` + `` / `` - ``, with
rational coefficients written ``p/q``; :func:`parse` reads it back exactly.
"""

from __future__ import annotations

import re
from fractions import Fraction
from math import gcd
from typing import Iterable, Mapping, Sequence, Union

Rat = Fraction
Scalar = Union[int, Fraction]

MAX_EXPONENT = 2**31 - 1


class VariableMismatch(ValueError):
    """Operands were declared over different variable tuples."""


class UnboundVariable(KeyError):
    pass


def _as_rat(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, int):
        return Fraction(c)
    if isinstance(c, str):
        return Fraction(c)
    raise TypeError(f"not an exact rational: {c!r}")


def _order_key(exp: tuple[int, ...]):
    return (sum(exp), exp[::-1])


class MultiPoly:
    """Immutable sparse polynomial with exact rational coefficients."""

    __slots__ = ("vars", "terms", "_hash")

    def __init__(self, vars: Sequence[str], terms: Mapping[tuple[int, ...], Scalar] | None = None):
        self.vars = tuple(vars)
        if len(set(self.vars)) != len(self.vars):
            raise ValueError(f"duplicate variable names in {self.vars}")
        clean: dict[tuple[int, ...], Fraction] = {}
        n = len(self.vars)
        for exp, c in (terms or {}).items():
            exp = tuple(exp)
            if len(exp) != n:
                raise ValueError(f"exponent vector {exp} does not match {n} variables")
            if any(e < 0 or e > MAX_EXPONENT for e in exp):
                raise OverflowError(f"exponent out of range in {exp}")
            c = _as_rat(c)
            if c:
                clean[exp] = c
        self.terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, vars: tuple[str, ...], terms: dict) -> "MultiPoly":
        obj = object.__new__(cls)
        obj.vars = vars
        obj.terms = terms
        obj._hash = None
        return obj

    # constructors ---------------------------------------------------------

    @classmethod
    def zero(cls, vars: Sequence[str]) -> "MultiPoly":
        return cls._raw(tuple(vars), {})

    @classmethod
    def const(cls, vars: Sequence[str], c: Scalar) -> "MultiPoly":
        vars = tuple(vars)
        c = _as_rat(c)
        return cls._raw(vars, {(0,) * len(vars): c} if c else {})

    @classmethod
    def var(cls, vars: Sequence[str], name: str) -> "MultiPoly":
        vars = tuple(vars)
        exp = [0] * len(vars)
        exp[vars.index(name)] = 1
        return cls._raw(vars, {tuple(exp): Fraction(1)})

    @classmethod
    def gens(cls, vars: Sequence[str]) -> list["MultiPoly"]:
        return [cls.var(vars, v) for v in vars]

    # basic queries --------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def is_constant(self) -> bool:
        return all(not any(e) for e in self.terms)

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError(f"{self} is not constant")
        return self.terms.get((0,) * len(self.vars), Fraction(0))

    def total_degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def degree_in(self, name: str) -> int:
        i = self.vars.index(name)
        return max((e[i] for e in self.terms), default=-1)

    def used_vars(self) -> tuple[str, ...]:
        used = set()
        for e in self.terms:
            used.update(i for i, k in enumerate(e) if k)
        return tuple(v for i, v in enumerate(self.vars) if i in used)

    def sorted_terms(self) -> list[tuple[tuple[int, ...], Fraction]]:
        """Terms in descending monomial order."""
        return sorted(self.terms.items(), key=lambda t: _order_key(t[0]), reverse=True)

    def leading_term(self) -> tuple[tuple[int, ...], Fraction]:
        if not self.terms:
            raise ValueError("zero polynomial has no leading term")
        exp = max(self.terms, key=_order_key)
        return exp, self.terms[exp]

    def coeff(self, monomial: Mapping[str, int]) -> Fraction:
        exp = [0] * len(self.vars)
        for k, v in monomial.items():
            exp[self.vars.index(k)] = v
        return self.terms.get(tuple(exp), Fraction(0))

    def content(self) -> Fraction:
        """Positive rational c with self/c having coprime integer coefficients."""
        if not self.terms:
            return Fraction(1)
        num = 0
        den = 1
        for c in self.terms.values():
            num = gcd(num, c.numerator)
            den = den * c.denominator // gcd(den, c.denominator)
        return Fraction(num, den)

    # variable management --------------------------------------------------

    def to_vars(self, vars: Sequence[str]) -> "MultiPoly":
        """Re-express over another variable tuple containing every used variable."""
        vars = tuple(vars)
        if vars == self.vars:
            return self
        pos = {v: i for i, v in enumerate(vars)}
        missing = [v for v in self.used_vars() if v not in pos]
        if missing:
            raise VariableMismatch(f"variables {missing} not declared in {vars}")
        idx = [(pos[v], i) for i, v in enumerate(self.vars) if v in pos]
        n = len(vars)
        out = {}
        for e, c in self.terms.items():
            ne = [0] * n
            for j, i in idx:
                ne[j] = e[i]
            out[tuple(ne)] = c
        return MultiPoly._raw(vars, out)

    def shrink(self) -> "MultiPoly":
        """Drop declared variables that do not occur."""
        return self.to_vars(self.used_vars())

    def _check(self, other: "MultiPoly"):
        if self.vars != other.vars:
            raise VariableMismatch(f"{self.vars} vs {other.vars}")

    def _coerce(self, other) -> "MultiPoly":
        if isinstance(other, MultiPoly):
            self._check(other)
            return other
        if isinstance(other, (int, Fraction)):
            return MultiPoly.const(self.vars, other)
        return NotImplemented

    # arithmetic -----------------------------------------------------------

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self.terms)
        for e, c in other.terms.items():
            s = out.get(e)
            if s is None:
                out[e] = c
            else:
                s = s + c
                if s:
                    out[e] = s
                else:
                    del out[e]
        return MultiPoly._raw(self.vars, out)

    __radd__ = __add__

    def __neg__(self):
        return MultiPoly._raw(self.vars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c: Scalar) -> "MultiPoly":
        c = _as_rat(c)
        if not c:
            return MultiPoly.zero(self.vars)
        return MultiPoly._raw(self.vars, {e: v * c for e, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if len(self.terms) > len(other.terms):
            a, b = self.terms, other.terms
        else:
            a, b = other.terms, self.terms
        out: dict = {}
        get = out.get
        for e2, c2 in b.items():
            for e1, c1 in a.items():
                e = tuple([x + y for x, y in zip(e1, e2)])
                s = get(e)
                out[e] = c1 * c2 if s is None else s + c1 * c2
        return MultiPoly._raw(self.vars, {e: c for e, c in out.items() if c})

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, MultiPoly):
            if not other.is_constant():
                raise ValueError("division only by constants; use exact_divide")
            other = other.constant_value()
        other = _as_rat(other)
        if not other:
            raise ZeroDivisionError("polynomial division by zero")
        return self.scale(1 / other)

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("only non-negative integer powers")
        result = MultiPoly.const(self.vars, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.is_constant() and self.constant_value() == other
        if not isinstance(other, MultiPoly):
            return NotImplemented
        return self.vars == other.vars and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.vars, frozenset(self.terms.items())))
        return self._hash

    def diff(self, name: str) -> "MultiPoly":
        i = self.vars.index(name)
        out = {}
        for e, c in self.terms.items():
            if e[i]:
                ne = list(e)
                ne[i] -= 1
                out[tuple(ne)] = c * e[i]
        return MultiPoly._raw(self.vars, out)

    # substitution / evaluation ---------------------------------------------

    def subs(self, mapping: Mapping[str, "MultiPoly | Scalar"], vars: Sequence[str] | None = None) -> "MultiPoly":
        """Substitute polynomials for variables; result lives over `vars`.

        Unmapped variables are kept and must be declared in `vars` when they occur.
        """
        if vars is None:
            vars = self.vars
        vars = tuple(vars)
        images = []
        for v in self.vars:
            if v in mapping:
                img = mapping[v]
                if isinstance(img, MultiPoly):
                    img = img.to_vars(vars)
                else:
                    img = MultiPoly.const(vars, img)
            else:
                img = MultiPoly.var(vars, v) if v in vars else None
            images.append(img)
        powers: list[dict[int, MultiPoly]] = [dict() for _ in self.vars]

        def power(i, k):
            cache = powers[i]
            if k not in cache:
                if images[i] is None:
                    raise VariableMismatch(f"variable {self.vars[i]} has no image in {vars}")
                cache[k] = images[i] ** k if k < 2 or (k - 1) not in cache else cache[k - 1] * images[i]
            return cache[k]

        out = MultiPoly.zero(vars)
        for e, c in self.terms.items():
            term = MultiPoly.const(vars, c)
            for i, k in enumerate(e):
                if k:
                    term = term * power(i, k)
            out = out + term
        return out

    def eval(self, point: Mapping[str, object]):
        """Evaluate at a point; exact if every bound value is rational."""
        missing = [v for v in self.used_vars() if v not in point]
        if missing:
            raise UnboundVariable(f"unbound variables {missing}")
        vals = [point.get(v, 0) for v in self.vars]
        exact = all(isinstance(v, (int, Fraction)) for v in vals)
        total = Fraction(0) if exact else 0.0
        for e, c in self.terms.items():
            t = c if exact else float(c)
            for v, k in zip(vals, e):
                if k:
                    t = t * v**k
            total = total + t
        return total

    # printing ---------------------------------------------------------------

    def __str__(self) -> str:
        return to_text(self)

    def __repr__(self) -> str:
        return f"MultiPoly({self.vars!r}, {to_text(self)!r})"


# ---------------------------------------------------------------------------
# text form


def _fmt_rat(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def to_text(p: MultiPoly) -> str:
    if not p.terms:
        return "0"
    parts = []
    for exp, c in p.sorted_terms():
        factors = []
        for v, k in zip(p.vars, exp):
            if k == 1:
                factors.append(v)
            elif k > 1:
                factors.append(f"{v}^{k}")
        mag = abs(c)
        if factors:
            body = "*".join(factors if mag == 1 else [_fmt_rat(mag)] + factors)
        else:
            body = _fmt_rat(mag)
        parts.append(("-" if c < 0 else "+", body))
    sign, body = parts[0]
    text = ("-" if sign == "-" else "") + body
    for sign, body in parts[1:]:
        text += f" {sign} {body}"
    return text


_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(\*\*|[-+*/^()]))")


class ParseError(ValueError):
    pass


def _tokenize(text: str) -> list[tuple[str, str]]:
    pos = 0
    toks = []
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected input at {pos}: {text[pos:pos + 10]!r}")
        num, name, op = m.groups()
        if num is not None:
            toks.append(("num", num))
        elif name is not None:
            toks.append(("name", name))
        else:
            toks.append(("op", "^" if op == "**" else op))
        pos = m.end()
        while pos < len(text) and text[pos].isspace():
            pos += 1
    return toks


class _Parser:
    def __init__(self, text: str, vars: tuple[str, ...] | None):
        self.toks = _tokenize(text)
        self.i = 0
        self.vars = vars
        self.seen: list[str] = []

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None)

    def take(self):
        tok = self.peek()
        self.i += 1
        return tok

    # grammar: expr := term (('+'|'-') term)* ; term := unary (('*'|'/') unary)*
    # unary := ('-'|'+') unary | power ; power := atom ('^' int)?
    def expr(self):
        node = self.term()
        while self.peek() in (("op", "+"), ("op", "-")):
            op = self.take()[1]
            rhs = self.term()
            node = ("+", node, rhs) if op == "+" else ("-", node, rhs)
        return node

    def term(self):
        node = self.unary()
        while self.peek() in (("op", "*"), ("op", "/")):
            op = self.take()[1]
            rhs = self.unary()
            node = ("*", node, rhs) if op == "*" else ("/", node, rhs)
        return node

    def unary(self):
        if self.peek() == ("op", "-"):
            self.take()
            return ("neg", self.unary())
        if self.peek() == ("op", "+"):
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek() == ("op", "^"):
            self.take()
            kind, val = self.take()
            if kind != "num":
                raise ParseError("exponent must be a non-negative integer literal")
            return ("^", base, int(val))
        return base

    def atom(self):
        kind, val = self.take()
        if kind == "num":
            return ("num", Fraction(int(val)))
        if kind == "name":
            if self.vars is not None and val not in self.vars:
                raise VariableMismatch(f"undeclared variable {val!r}")
            if val not in self.seen:
                self.seen.append(val)
            return ("var", val)
        if (kind, val) == ("op", "("):
            node = self.expr()
            if self.take() != ("op", ")"):
                raise ParseError("missing ')'")
            return node
        raise ParseError(f"unexpected token {val!r}")


def _build(node, vars):
    kind = node[0]
    if kind == "num":
        return MultiPoly.const(vars, node[1])
    if kind == "var":
        return MultiPoly.var(vars, node[1])
    if kind == "neg":
        return -_build(node[1], vars)
    if kind == "^":
        return _build(node[1], vars) ** node[2]
    a, b = _build(node[1], vars), _build(node[2], vars)
    if kind == "+":
        return a + b
    if kind == "-":
        return a - b
    if kind == "*":
        return a * b
    if not b.is_constant():
        raise ParseError("division by a non-constant")
    return a / b


def parse(text: str, vars: Sequence[str] | None = None) -> MultiPoly:
    """Parse a polynomial expression.

    Without `vars`, the variables are the names in order of first appearance.
    """
    p = _Parser(text, tuple(vars) if vars is not None else None)
    tree = p.expr()
    if p.i != len(p.toks):
        raise ParseError(f"trailing input in {text!r}")
    decl = tuple(vars) if vars is not None else tuple(p.seen)
    return _build(tree, decl)


# ---------------------------------------------------------------------------
# ring-level helpers


def unify(*polys: MultiPoly) -> list[MultiPoly]:
    """Re-express polynomials over the ordered union of their declarations."""
    names: list[str] = []
    for p in polys:
        for v in p.vars:
            if v not in names:
                names.append(v)
    return [p.to_vars(names) for p in polys]


def poly_arith(a: MultiPoly, b: MultiPoly, op: str) -> MultiPoly:
    a._check(b)
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown op {op!r}")


def eval_poly(p: MultiPoly, point: Mapping[str, object]):
    return p.eval(point)


def pseudo_reduce(p: MultiPoly, divisors: Iterable[MultiPoly]) -> MultiPoly:
    """Remainder of multivariate division of `p` by `divisors` (grlex order).

    The remainder has no term divisible by any divisor's leading monomial and
    ``p - remainder`` lies in the ideal the divisors generate.
    """
    divs = [d for d in divisors if not d.is_zero()]
    for d in divs:
        p._check(d)
    if not divs:
        return p
    leads = [d.leading_term() for d in divs]
    work = dict(p.terms)
    rem: dict = {}
    while work:
        exp = max(work, key=_order_key)
        c = work[exp]
        for d, (lexp, lc) in zip(divs, leads):
            if all(a >= b for a, b in zip(exp, lexp)):
                q = c / lc
                shift = tuple(a - b for a, b in zip(exp, lexp))
                for de, dc in d.terms.items():
                    e = tuple(x + y for x, y in zip(de, shift))
                    s = work.get(e, Fraction(0)) - q * dc
                    if s:
                        work[e] = s
                    else:
                        work.pop(e, None)
                break
        else:
            rem[exp] = c
            del work[exp]
    return MultiPoly._raw(p.vars, rem)


def exact_divide(p: MultiPoly, d: MultiPoly) -> MultiPoly | None:
    """Quotient p/d when d divides p exactly, else None."""
    p._check(d)
    if d.is_zero():
        raise ZeroDivisionError("division by zero polynomial")
    lexp, lc = d.leading_term()
    work = dict(p.terms)
    quot: dict = {}
    while work:
        exp = max(work, key=_order_key)
        if not all(a >= b for a, b in zip(exp, lexp)):
            return None
        q = work[exp] / lc
        shift = tuple(a - b for a, b in zip(exp, lexp))
        quot[shift] = q
        for de, dc in d.terms.items():
            e = tuple(x + y for x, y in zip(de, shift))
            s = work.get(e, Fraction(0)) - q * dc
            if s:
                work[e] = s
            else:
                work.pop(e, None)
    return MultiPoly._raw(p.vars, quot)
