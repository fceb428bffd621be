"""Builtin monoid generators, addressable by name."""
from __future__ import annotations

import numpy as np

from .hsiao import FiniteAbelianGroup, build_group_zmod, build_hsiao, build_sigma_n
from .monoid import FiniteMonoid


def build_t2() -> FiniteMonoid:
    """All self-maps of {0, 1} under composition (fg)(x) = f(g(x)).

    Regular and left duo but not a left regular band of groups: the swap
    conjugates one constant map to the other.
    """
    maps = [(0, 1), (1, 0), (0, 0), (1, 1)]
    T = np.array([[maps.index(tuple(f[g[x]] for x in (0, 1))) for g in maps] for f in maps])
    return FiniteMonoid(T, 0, names=["id", "swap", "const0", "const1"], kind="t2")


def build(name: str, n: int | None = None, group: str | None = None, m: int | None = None) -> FiniteMonoid:
    name = name.lower()
    if name in ("sigma", "sigma_n"):
        return build_sigma_n(_need(n, "n"))
    if name == "hsiao":
        return build_hsiao(_need(n, "n"), FiniteAbelianGroup.parse(group))
    if name == "group_zmod":
        if m is None:
            m = n if n is not None else FiniteAbelianGroup.parse(group).order
        return build_group_zmod(m)
    if name == "t2":
        return build_t2()
    raise KeyError(f"unknown builtin monoid {name!r}; choose from {', '.join(BUILTINS)}")


def _need(v, what: str) -> int:
    if v is None:
        raise ValueError(f"--{what} is required for this generator")
    return int(v)


BUILTINS = ("sigma_n", "hsiao", "group_zmod", "t2")
