"""Coefficient families addressable by string id.

Each family maps an index ``n`` (or, for ``const-alpha``, the order itself)
to a coefficient object, and ``None`` to the limit. Passing ``None`` for a
family without a limit raises.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable

from .coeffs import (CoefficientError, OrderFunction, make_prop15_coefficient, make_prop18_kernel,
                     make_sharp_log_order)
from .levy import LevyExponent


@dataclass(frozen=True)
class Family:
    id: str
    kind: str  # "diffusion", "order", "kernel" or "exponent"
    description: str
    build: Callable[[Any], Any]
    min_index: int = 1
    has_limit: bool = True

    def __call__(self, index=None):
        if index is None:
            if not self.has_limit:
                raise CoefficientError(f"family {self.id!r} has no limit member")
            return self.build(None)
        if isinstance(index, int) and index < self.min_index:
            raise CoefficientError(f"family {self.id!r} needs n >= {self.min_index}, got {index}")
        return self.build(index)


def _rec_to_trans_order(n):
    # offset 1 + 1/n over a fixed eps = 1/2
    return make_sharp_log_order(0.5, 1.0 if n is None else 1.0 + 1.0 / n)


def _trans_to_rec_order(n):
    return make_sharp_log_order(1.0 if n is None else 1.0 - 1.0 / n, 1.0)


def _const_order(alpha):
    if alpha is None:
        raise CoefficientError("const-alpha has no limit member")
    return OrderFunction.constant(float(alpha))


def _unit_normalised_power(alpha: float, d: int) -> LevyExponent:
    """Jump exponent equal to ``|xi|^alpha`` exactly (scale fixed by ``phi(e_1) = 1``)."""
    raw = LevyExponent(d, OrderFunction.constant(alpha))
    unit = raw(_unit(d))
    return LevyExponent(d, OrderFunction.constant(alpha), scale=1.0 / unit)


def _unit(d):
    import numpy as np

    return np.eye(d)[0]


def _power_to_brownian(n, d=2):
    if n is None:
        # 1/2 <S xi, xi> = |xi|^2
        return LevyExponent(d, gaussian=2.0)
    return _unit_normalised_power(2.0 - 1.0 / n, d)


FAMILIES: dict[str, Family] = {
    "prop15i": Family("prop15i", "diffusion", "(2+|x|)^2 log(2+|x|)^(1+1/n) -> (2+|x|)^2 log(2+|x|)",
                      lambda n: make_prop15_coefficient("conservative_limit") if n is None
                      else make_prop15_coefficient("explosive_family", n)),
    "prop15ii": Family("prop15ii", "diffusion", "(2+|x|)^(2-1/n) log(2+|x|)^2 -> (2+|x|)^2 log(2+|x|)^2",
                       lambda n: make_prop15_coefficient("explosive_limit") if n is None
                       else make_prop15_coefficient("conservative_family", n)),
    "prop16i": Family("prop16i", "order", "1 + 1/n - log(u+e^2)^(-1/2) -> 1 - log(u+e^2)^(-1/2)",
                      _rec_to_trans_order),
    "prop16ii": Family("prop16ii", "order", "1 - log(u+e^2)^(-(1-1/n)) -> 1 - log(u+e^2)^(-1)",
                       _trans_to_rec_order, min_index=2),
    "prop18i": Family("prop18i", "kernel", "(c+1) |x-y|^(-1-alpha_n) with the prop16i orders",
                      lambda n: make_prop18_kernel(_rec_to_trans_order(n))),
    "prop18ii": Family("prop18ii", "kernel", "(c+1) |x-y|^(-1-alpha_n) with the prop16ii orders",
                       lambda n: make_prop18_kernel(_trans_to_rec_order(n)), min_index=2),
    "const-alpha": Family("const-alpha", "order", "constant order alpha (indexed by alpha)",
                          _const_order, min_index=0, has_limit=False),
    "remark17": Family("remark17", "exponent", "|xi|^(2-1/n) on R^2 -> |xi|^2", _power_to_brownian),
}

FAMILY_IDS = tuple(FAMILIES)


def get_family(family_id: str) -> Family:
    try:
        return FAMILIES[family_id]
    except KeyError:
        raise CoefficientError(f"unknown family {family_id!r}; known: {', '.join(FAMILY_IDS)}") from None


def build_member(family_id: str, index=None):
    """Coefficient object for ``index`` (``None`` for the limit)."""
    return get_family(family_id)(index)
