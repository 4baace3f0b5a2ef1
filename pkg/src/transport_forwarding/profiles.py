"""Initial-condition catalog and the small expression grammar used by configs.

An expression is a sum of terms, each ``[coef*]shape``:

    const           1 everywhere
    sin(k)          sin(2 pi k x), integer k >= 1
    poly(p)         x**p, integer p >= 0
    bump(c,hw[,p])  ((1 - ((x-c)/hw)^2)_+)^p, compactly supported in
                    [c-hw, c+hw]; p defaults to 4
    <number>        a bare constant

Examples: ``sin(1) - poly(1)``, ``0.5*const + 2*sin(2)``, ``bump(0.3,0.1)``.
There is deliberately no general expression parser.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ConfigError

__all__ = ["parse_profile", "as_profile", "Profile"]


class Profile:
    """A w0 profile: vectorized callable on [0, 1] with a printable form."""

    def __init__(self, fn, expr: str):
        self._fn = fn
        self.expr = expr

    def __call__(self, x):
        return self._fn(np.asarray(x, dtype=float))

    def __repr__(self):
        return f"Profile({self.expr!r})"


def _shape(name: str, args: list[float]):
    if name == "const":
        if args:
            raise ConfigError("const takes no arguments")
        return lambda x: np.ones_like(x)
    if name == "sin":
        if len(args) != 1 or args[0] != int(args[0]) or args[0] < 1:
            raise ConfigError(f"sin needs one integer frequency >= 1, got {args}")
        k = 2.0 * math.pi * int(args[0])
        return lambda x: np.sin(k * x)
    if name == "poly":
        if len(args) != 1 or args[0] != int(args[0]) or args[0] < 0:
            raise ConfigError(f"poly needs one integer power >= 0, got {args}")
        p = int(args[0])
        return lambda x: x**p
    if name == "bump":
        if len(args) not in (2, 3):
            raise ConfigError(f"bump needs (center, halfwidth[, power]), got {args}")
        c, hw = args[0], args[1]
        p = int(args[2]) if len(args) == 3 else 4
        if not (hw > 0 and p >= 1):
            raise ConfigError(f"bump needs halfwidth > 0 and power >= 1, got {args}")

        def fn(x, c=c, hw=hw, p=p):
            s = (x - c) / hw
            return np.maximum(1.0 - s * s, 0.0) ** p

        return fn
    raise ConfigError(f"unknown profile shape {name!r}")


def _split_terms(expr: str) -> list[str]:
    """Split on top-level + and -, keeping the sign with each term."""
    terms, depth, cur = [], 0, ""
    for ch in expr:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth < 0:
                raise ConfigError(f"unbalanced parentheses in {expr!r}")
        prev = cur.rstrip()[-1:].lower()
        if ch in "+-" and depth == 0 and cur.strip() and prev != "e":
            # a sign directly after 'e' belongs to a float exponent
            terms.append(cur)
            cur = ch
            continue
        cur += ch
    if depth != 0:
        raise ConfigError(f"unbalanced parentheses in {expr!r}")
    if cur.strip():
        terms.append(cur)
    if not terms:
        raise ConfigError("empty profile expression")
    return terms


def _parse_term(term: str):
    term = term.strip().replace(" ", "")
    sign = 1.0
    while term and term[0] in "+-":
        if term[0] == "-":
            sign = -sign
        term = term[1:]
    if not term:
        raise ConfigError("empty term in profile expression")
    coef = sign
    if "*" in term:
        pre, _, term = term.partition("*")
        try:
            coef = sign * float(pre)
        except ValueError as exc:
            raise ConfigError(f"bad coefficient {pre!r}") from exc
    try:
        value = float(term)
    except ValueError:
        pass
    else:
        return lambda x, v=coef * value: np.full_like(x, v)
    name, _, rest = term.partition("(")
    args: list[float] = []
    if rest:
        if not rest.endswith(")"):
            raise ConfigError(f"malformed term {term!r}")
        body = rest[:-1]
        if body:
            try:
                args = [float(a) for a in body.split(",")]
            except ValueError as exc:
                raise ConfigError(f"bad arguments in {term!r}") from exc
    shape = _shape(name, args)
    return lambda x, c=coef, fn=shape: c * fn(x)


def parse_profile(expr: str) -> Profile:
    """Parse an initial-condition expression into a callable profile."""
    fns = [_parse_term(t) for t in _split_terms(expr)]

    def fn(x):
        out = np.zeros_like(x)
        for f in fns:
            out += f(x)
        return out

    return Profile(fn, expr.strip())


def as_profile(w0) -> Profile:
    """Accept a Profile, a plain callable, an expression, or a fine sample.

    A 1-D array is treated as uniform samples on [0, 1] and linearly
    interpolated.
    """
    if isinstance(w0, Profile):
        return w0
    if isinstance(w0, str):
        return parse_profile(w0)
    if callable(w0):
        return Profile(lambda x: np.asarray(w0(x), dtype=float), repr(w0))
    arr = np.asarray(w0, dtype=float)
    if arr.ndim != 1 or arr.size < 2:
        raise ConfigError("sampled w0 must be a 1-D array with >= 2 entries")
    xs = np.linspace(0.0, 1.0, arr.size)
    return Profile(lambda x: np.interp(x, xs, arr), f"<{arr.size} samples>")
