"""Resource arithmetic for the copy-tapping and Grover attacks, and key-generation yield.

Everything that scales like ``2**|K|`` is done with exact integers, ``Fraction`` or
mpmath so that key lengths of a few thousand bits never overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath

from ..measurement import analytic_ber

BOUNDARY_RTOL = Fraction(1, 10**12)


def _exact(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(repr(value))
    if isinstance(value, str):
        v = value.replace(" ", "")
        if "**" in v or "^" in v:
            base, exp = v.replace("^", "**").split("**")
            return Fraction(int(base)) ** int(exp.strip("()"))
        return Fraction(v)
    raise TypeError(f"cannot interpret {value!r} as an exact number")


@dataclass(frozen=True)
class CopiesCondition:
    copies: int
    eta: Fraction
    keylen: int
    margin: Fraction  # r(1-eta) - 2^|K| eta

    @property
    def satisfied(self) -> bool:
        return self.margin >= 0

    @property
    def status(self) -> str:
        scale = max(abs(self.copies * (1 - self.eta)), abs((1 << self.keylen) * self.eta))
        if scale == 0 or abs(self.margin) <= BOUNDARY_RTOL * scale:
            return "boundary"
        return "satisfied" if self.satisfied else "unsatisfied"


def copies_condition(r: int, eta, keylen: int) -> CopiesCondition:
    """Exact check of ``r (1 - eta) >= 2**keylen * eta``.

    ``eta`` may be a float (read by its decimal repr), a ``Fraction`` or a string
    such as ``"2**-2000"``.
    """
    e = _exact(eta)
    if not 0 < e <= 1:
        raise ValueError(f"transmittance must lie in (0, 1], got {eta!r}")
    return CopiesCondition(r, e, keylen, r * (1 - e) - (1 << keylen) * e)


LOG10_2 = math.log10(2)


@dataclass(frozen=True)
class ResourceReport:
    keylen: int
    copies: int
    loss_db: float
    fiber_km: float
    fiber_loss_db_per_km: float
    exact_loss_db: float
    data_volume_digits: int
    data_volume_log10: float

    @property
    def data_volume(self) -> str:
        """``2**|K|`` copies' worth of data as a power-of-ten string, e.g. ``1e602``."""
        return f"1e{self.data_volume_digits}"


def resource_report(keylen: int, fiber_loss_db_per_km: float = 0.2, copies: int = 1) -> ResourceReport:
    """Loss needed for the tapping attack and the data volume of ``2**|K|`` copies.

    ``loss_db`` is ``10 log10(2**|K| / r)`` (Eve's tap ``1 - eta`` taken as ~1);
    ``exact_loss_db`` solves ``r (1 - eta) = 2**|K| eta`` exactly.
    """
    if keylen < 1:
        raise ValueError(f"key length must be positive, got {keylen}")
    if copies < 1:
        raise ValueError(f"copies must be positive, got {copies}")
    loss_db = 10 * (keylen * LOG10_2 - math.log10(copies))
    exact_db = float(10 * mpmath.log10(mpmath.mpf(copies + (1 << keylen)) / copies))  # eta* = r / (r + 2^K)
    return ResourceReport(
        keylen=keylen,
        copies=copies,
        loss_db=loss_db,
        fiber_km=loss_db / fiber_loss_db_per_km,
        fiber_loss_db_per_km=fiber_loss_db_per_km,
        exact_loss_db=exact_db,
        data_volume_digits=len(str(1 << keylen)) - 1,
        data_volume_log10=keylen * LOG10_2,
    )


@dataclass(frozen=True)
class GroverReport:
    keylen: int
    marked: int
    iterations: int
    t_star: int
    success: float
    t_star_log10: float

    @property
    def t_star_scale(self) -> str:
        return f"10^{round(self.t_star_log10)}"

    @property
    def t_star_scientific(self) -> str:
        exp = math.floor(self.t_star_log10)
        return f"{10 ** (self.t_star_log10 - exp):.3f}e{exp}"


def grover_report(keylen: int, marked: int = 1, t: int | None = None) -> GroverReport:
    """Closed-form Grover rotation: ``sin^2((2t+1) theta)``, ``theta = asin(sqrt(marked / 2**keylen))``."""
    if keylen < 1:
        raise ValueError(f"key length must be positive, got {keylen}")
    if not 1 <= marked <= 1 << keylen:
        raise ValueError(f"marked count must lie in [1, 2**{keylen}], got {marked}")
    with mpmath.workprec(keylen // 2 + 96):
        theta = mpmath.asin(mpmath.sqrt(mpmath.mpf(marked) / mpmath.mpf(2) ** keylen))
        t_star = int(mpmath.floor(mpmath.pi / (4 * theta)))
        iters = t_star if t is None else t
        if iters < 0:
            raise ValueError("iteration count must be nonnegative")
        success = float(mpmath.sin((2 * iters + 1) * theta) ** 2)
        log10 = float(mpmath.log10(t_star)) if t_star > 0 else float("-inf")
    return GroverReport(keylen, marked, iters, t_star, success, log10)


def binary_entropy(p: float) -> float:
    if p <= 0 or p >= 1:
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


@dataclass(frozen=True)
class KeygenYield:
    photons: float
    bits_sent: float
    eve_model: str
    accounting: str
    eve_ber: float
    paper_yield: float
    entropy_yield: float
    bob_errors: float

    @property
    def gross(self) -> float:
        return self.paper_yield if self.accounting == "paper" else self.entropy_yield

    @property
    def net(self) -> float:
        return max(self.gross - self.bob_errors, 0.0)

    @property
    def bob_overhead_significant(self) -> bool:
        return self.bob_errors > 0.01 * self.gross


def keygen_yield(S: float, n: float, eve_model: str = "heterodyne", accounting: str = "paper") -> KeygenYield:
    """Bits distillable from ``n`` qumodes when Eve's error rate follows the given receiver curve.

    The ``"paper"`` accounting counts Eve's expected errors ``n * P_eve``; entropy accounting
    uses ``n * h2(P_eve)``. Bob's own expected errors are reported for subtraction.
    """
    if n < 1:
        raise ValueError(f"block length must be at least 1, got {n}")
    if eve_model not in ("heterodyne", "phase"):
        raise ValueError(f"Eve's receiver must be heterodyne or phase, got {eve_model!r}")
    if accounting not in ("paper", "entropy"):
        raise ValueError(f"accounting must be 'paper' or 'entropy', got {accounting!r}")
    p = analytic_ber(eve_model, S)
    return KeygenYield(
        photons=S,
        bits_sent=n,
        eve_model=eve_model,
        accounting=accounting,
        eve_ber=p,
        paper_yield=n * p,
        entropy_yield=n * binary_entropy(p),
        bob_errors=n * analytic_ber("optimal", S),
    )
