"""Two-input Mamdani controller on the normalized universe [-1, 1].

Each variable (error, error change, output) is partitioned by five evenly
spaced triangles NL, NS, ZE, PS, PL with peaks at -1, -0.5, 0, 0.5, 1 and
half-width 0.5. Rules fire with ``min``, aggregate with ``max``, and the crisp
output is the centroid of the aggregated set, computed exactly (the aggregated
set is piecewise linear, so every piece is integrated in closed form).
"""

from __future__ import annotations

from dataclasses import dataclass, field

LABELS = ("NL", "NS", "ZE", "PS", "PL")
PEAKS = (-1.0, -0.5, 0.0, 0.5, 1.0)
HALF_WIDTH = 0.5


def clamp(x: float, lo: float = -1.0, hi: float = 1.0) -> float:
    return lo if x < lo else hi if x > hi else x


def membership(label: int, x: float) -> float:
    """Degree of ``x`` in triangle ``label`` (index into LABELS)."""
    return max(0.0, 1.0 - abs(x - PEAKS[label]) / HALF_WIDTH)


def memberships(x: float) -> list[float]:
    return [membership(k, x) for k in range(len(PEAKS))]


def pi_rule_table() -> list[list[int]]:
    """PI-like table: output index = clamp(i + j - 2, 0, 4)."""
    n = len(LABELS)
    return [[min(max(i + j - 2, 0), n - 1) for j in range(n)] for i in range(n)]


def _segment_moments(x0: float, y0: float, x1: float, y1: float) -> tuple[float, float]:
    """Exact integrals of y and x*y for y linear between (x0, y0) and (x1, y1)."""
    h = x1 - x0
    area = 0.5 * h * (y0 + y1)
    # Simpson is exact for the quadratic x*y
    xm = 0.5 * (x0 + x1)
    ym = 0.5 * (y0 + y1)
    moment = h / 6.0 * (x0 * y0 + 4.0 * xm * ym + x1 * y1)
    return area, moment


def aggregate(strengths: list[float], x: float) -> float:
    """Clipped-and-maxed output membership at ``x``."""
    return max(min(w, membership(k, x)) for k, w in enumerate(strengths))


def centroid(strengths: list[float]) -> float:
    """Centroid over [-1, 1] of ``max_k min(strengths[k], triangle_k)``.

    Between two neighbouring peaks only two triangles are nonzero, one falling
    and one rising, so the kinks of the aggregated curve are the clip points
    of each and their pairwise crossings. Those are enumerated per interval.
    """
    area = 0.0
    moment = 0.0
    for k in range(len(PEAKS) - 1):
        a, b = PEAKS[k], PEAKS[k + 1]
        wa, wb = strengths[k], strengths[k + 1]
        if wa <= 0.0 and wb <= 0.0:
            continue
        width = b - a
        # falling(x) = (b - x)/width, rising(x) = (x - a)/width
        cuts = {a, b, a + 0.5 * width}
        for level in (wa, wb):
            if 0.0 < level < 1.0:
                cuts.add(b - level * width)
                cuts.add(a + level * width)
        xs = sorted(c for c in cuts if a <= c <= b)
        ys = [aggregate(strengths, x) for x in xs]
        for i in range(len(xs) - 1):
            da, dm = _segment_moments(xs[i], ys[i], xs[i + 1], ys[i + 1])
            area += da
            moment += dm
    if area <= 0.0:
        raise ZeroDivisionError("aggregated output set has zero area")
    return moment / area


@dataclass
class FuzzyInference:
    """Rule base and inference for the period controller."""

    rule_table: list[list[int]] = field(default_factory=pi_rule_table)

    def firing_strengths(self, e: float, de: float) -> list[float]:
        mu_e = memberships(e)
        mu_de = memberships(de)
        out = [0.0] * len(LABELS)
        for i, me in enumerate(mu_e):
            if me == 0.0:
                continue
            for j, md in enumerate(mu_de):
                if md == 0.0:
                    continue
                k = self.rule_table[i][j]
                w = min(me, md)
                if w > out[k]:
                    out[k] = w
        return out

    def infer(self, e: float, de: float) -> float:
        if not (-1.0 <= e <= 1.0 and -1.0 <= de <= 1.0):
            raise ValueError(f"inputs must be clamped to [-1, 1], got e={e}, de={de}")
        return clamp(centroid(self.firing_strengths(e, de)))


_DEFAULT = FuzzyInference()


def fuzzy_infer(e: float, de: float) -> float:
    """Crisp output in [-1, 1] of the default PI rule base."""
    return _DEFAULT.infer(e, de)
