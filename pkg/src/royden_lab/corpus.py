"""Symbolic test-function tags used by manifests.

A tag is a ``*``-separated product of factors::

    1, w, w^k, w-2, w+0.5, (w-2), exp(w/3), zbi:what, zbi:x,y

``zbi:`` is the normalized inner function with a single zero at the base
point (``what``) or at ``x + iy``.
"""

from __future__ import annotations

import re

import numpy as np

from .errors import ConfigError
from .geometry import CircularDomain
from .hardy import DEFAULT_K, zero_based_inner

_NUM = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"
_PATTERNS = [
    ("one", re.compile(r"1")),
    ("power", re.compile(rf"w(?:\^\(?({_NUM})\)?)?")),
    ("shift", re.compile(rf"\(?w\s*([-+])\s*({_NUM})\)?")),
    ("exp", re.compile(rf"exp\(w\s*/\s*({_NUM})\)")),
    ("zbi", re.compile(rf"zbi:(what|({_NUM})\s*,\s*({_NUM}))")),
]

INNERS = ("1", "w", "w^2", "zbi:what")
OUTERS = ("1", "w-2", "exp(w/3)")

_zbi_cache: dict = {}


def _split(tag: str) -> list[str]:
    parts, depth, cur = [], 0, ""
    for ch in tag:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "*" and depth == 0:
            parts.append(cur.strip())
            cur = ""
        else:
            cur += ch
    parts.append(cur.strip())
    return parts


def _factor(text: str, domain: CircularDomain, K: int):
    for kind, pat in _PATTERNS:
        m = pat.fullmatch(text)
        if not m:
            continue
        if kind == "one":
            return lambda w: np.ones_like(np.asarray(w, dtype=complex))
        if kind == "power":
            k = float(m.group(1)) if m.group(1) else 1.0
            if k != int(k):
                raise ConfigError(f"non-integer power in {text!r}")
            return lambda w, k=int(k): np.asarray(w, dtype=complex) ** k
        if kind == "shift":
            a = float(m.group(2)) * (-1 if m.group(1) == "-" else 1)
            return lambda w, a=a: np.asarray(w, dtype=complex) + a
        if kind == "exp":
            return lambda w, d=float(m.group(1)): np.exp(np.asarray(w, dtype=complex) / d)
        z = domain.base_point if m.group(1) == "what" else complex(float(m.group(2)), float(m.group(3)))
        key = (domain, z, K)
        if key not in _zbi_cache:
            _zbi_cache[key] = zero_based_inner(domain, [(z, 1)], K)
        return _zbi_cache[key]
    raise ConfigError(f"unrecognised function tag {text!r}")


def parse_tag(tag: str, domain: CircularDomain, K: int = DEFAULT_K):
    """Vectorised callable for a corpus tag."""
    factors = [_factor(p, domain, K) for p in _split(tag.replace(" ", ""))]
    if len(factors) == 1:
        return factors[0]

    def product(w):
        out = factors[0](w)
        for f in factors[1:]:
            out = out * f(w)
        return out

    return product


def beurling_corpus() -> list[tuple[str, str, str]]:
    """``(tag, inner tag, outer tag)`` for the 4 x 3 product corpus."""
    return [(f"{p}*{g}", p, g) for p in INNERS for g in OUTERS]
