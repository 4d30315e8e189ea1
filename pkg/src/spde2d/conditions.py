"""Numeric left-hand sides of the asymptotic conditions and the rate R.

The conditions are limits, so a finite configuration can only be tagged
``pass`` or ``warn`` against thresholds; nothing here is a hard failure.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .model import InitialSpectrum, ModeIndex, SpdeParams, check_a1


def tilde_exp(h: float, a: float, b: float) -> float:
    """h^{a ~^ b} for h in (0, 1)."""
    if not 0 < h < 1:
        raise ValueError("h must lie in (0, 1)")
    if a < b:
        return h ** a
    if a == b:
        return -(h ** b) * math.log(h)
    return h ** b


def tilde_exp_large(L: float, a: float, b: float) -> float:
    """L^{a ~^ b} = 1 / (1/L)^{a ~^ b} for L > 1."""
    if not L > 1:
        raise ValueError("L must be > 1")
    return 1.0 / tilde_exp(1.0 / L, a, b)


def rate_r(m: int, N: int, epsilon: float, alpha: float, alpha0: float) -> float:
    """sqrt(mN) (N^{alpha ~^ 2 - alpha} ^ eps^2 N^{alpha0 - alpha})."""
    first = tilde_exp_large(N, alpha, 2.0) * N ** (-alpha)
    return math.sqrt(m * N) * min(first, epsilon * epsilon * N ** (alpha0 - alpha))


@dataclass(frozen=True)
class ConditionItem:
    name: str
    quantity: str
    value: float
    want: str  # "small", "large", "finite", "true"
    status: str
    note: str = ""


@dataclass
class ConditionReport:
    items: list = field(default_factory=list)
    rate: float = float("nan")

    def get(self, name: str, index: int = 0) -> ConditionItem:
        hits = [it for it in self.items if it.name == name]
        return hits[index]

    def to_text(self) -> str:
        lines = [f"rate R = {self.rate!r}"]
        for it in self.items:
            line = f"{it.name:4s} {it.status:4s} {it.quantity} = {it.value:.6g}"
            if it.note:
                line += f"  # {it.note}"
            lines.append(line)
        return "\n".join(lines) + "\n"


# the constants of the reference experiment give 10^{-5.47}; the value quoted
# alongside them is 10^{-4.98}
B2_QUOTED_LOG10 = -4.98


def check_conditions(
    params: SpdeParams,
    spectrum: InitialSpectrum,
    alpha: float,
    epsilon: float,
    N: int,
    M1: int,
    M2: int,
    m: int,
    n: int,
    mode=(1, 1),
    alpha0: float = 2.99,
    small: float = 1.0,
    large: float = 1.0,
) -> ConditionReport:
    """Evaluate [A1], [A2], [B1], [B2] and [C1]-[C5].

    Quantities that should tend to 0 pass when ``<= small``; those that
    should diverge pass when ``>= large``.
    """
    rep = ConditionReport()
    items = rep.items

    def add(name, quantity, value, want, note=""):
        if want == "small":
            ok = value <= small
        elif want == "large":
            ok = value >= large
        elif want == "finite":
            ok = math.isfinite(value)
        else:
            ok = bool(value)
        items.append(ConditionItem(name, quantity, float(value), want, "pass" if ok else "warn", note))

    mode = ModeIndex.of(*mode)
    add("A1", "||A^{(1+a0)/2} X0||^2", check_a1(spectrum, params, alpha0), "finite")
    coef = spectrum.get(mode)
    if coef != 0:
        note = ""
    elif spectrum.is_zero():
        note = "X0 = 0"
    else:
        note = f"recommended mode {tuple(spectrum.dominant_mode())}"
    add("A2", f"<X0, e_{mode.l1},{mode.l2}> != 0", coef != 0, "true", note)

    eps2 = epsilon * epsilon
    add("B1", "eps^2 N^{1+a0-a}", eps2 * N ** (1 + alpha0 - alpha), "large")
    b2 = 1.0 / (eps2 * N ** (alpha0 - alpha))
    b2_ok = alpha < 2 and alpha < alpha0 < 3
    add("B2", "1/(eps^2 N^{a0-a})", b2 if b2_ok else float("inf"), "small",
        f"log10 = {math.log10(b2):.2f} (quoted elsewhere as {B2_QUOTED_LOG10}); "
        + ("alpha in (0,2), alpha0 in (alpha,3)" if b2_ok else "needs alpha < 2 and alpha0 in (alpha, 3)"))

    R = rate_r(m, N, epsilon, alpha, alpha0)
    rep.rate = R
    R2 = R * R
    Mmin = min(M1, M2)
    Ma0 = tilde_exp_large(Mmin ** 2, alpha0, 1.0)
    Ma = tilde_exp_large(Mmin ** 2, alpha, 1.0)
    na0 = tilde_exp_large(n, alpha0, 2.0)
    na = tilde_exp_large(n, alpha, 1.0)
    e2, e4 = eps2, eps2 * eps2

    rows = {
        "C1": [("n^2/M^{2(a0~1)}", n ** 2 / Ma0), ("n^2 eps^2/M^{2(a~1)}", n ** 2 * e2 / Ma),
               ("(n^{2-a0~2} v n^{2-a~1} eps^2)/R^2", max(n ** 2 / na0, n ** 2 * e2 / na) / R2)],
        "C2": [("n^3 eps^2/M^{2(a0~1)}", n ** 3 * e2 / Ma0), ("n^3 eps^4/M^{2(a~1)}", n ** 3 * e4 / Ma),
               ("(n^{3-a0~2} eps^2 v n^{3-a~1} eps^4)/R^2", max(n ** 3 * e2 / na0, n ** 3 * e4 / na) / R2)],
        "C3": [("eps^-4/M^{2(a0~1)}", 1 / (e4 * Ma0)), ("eps^-2/M^{2(a~1)}", 1 / (e2 * Ma)),
               ("(n^{-a0~2} eps^-4 v n^{-a~1} eps^-2)/R^2", max(1 / (na0 * e4), 1 / (na * e2)) / R2)],
        "C4": [("n^2 eps^-2/M^{2(a0~1)}", n ** 2 / (e2 * Ma0)), ("n^2/M^{2(a~1)}", n ** 2 / Ma),
               ("(n^{2-a0~2} eps^-2 v n^{2-a~1})/R^2", max(n ** 2 / (na0 * e2), n ** 2 / na) / R2)],
        "C5": [("(n v eps^-2)/M^{2(a0~1)}", max(n, 1 / e2) / Ma0), ("n eps^2/M^{2(a~1)}", n * e2 / Ma),
               ("(n v eps^-2)/R^2", max(n, 1 / e2) / R2)],
    }
    for name, qs in rows.items():
        for label, value in qs:
            add(name, label, value, "small")
    return rep
