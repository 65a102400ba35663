"""Independent brute-force cross-checks.

Everything here re-derives results of the main modules through a separate
code path: the shift as a literal sparse matrix applied n times, and the
consistency identity transcribed directly from its displayed form.  These
functions deliberately share no evaluation code with `shift` or `measures`;
agreement is asserted in the test suite, exactly and without tolerances.
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Tuple

from .errors import InfiniteTermError
from .measures import atoms_view
from .rationals import Interval, Scalar
from .tree import Vertex, Window, children, parent, window_vertices


@dataclass(frozen=True)
class TruncatedOperator:
    """Sparse matrix of the shift on an ordered finite window.

    Row v holds the single entry (pa(v), |lambda_v|^2): at most one nonzero
    per row because every vertex has at most one parent.
    """

    vertices: Tuple[Vertex, ...]
    entries: Dict[Vertex, Tuple[Vertex, Scalar]]


def truncate(tree, weights, window: Window) -> TruncatedOperator:
    """Matrix of the shift restricted to the window; edges leaving the
    window are dropped."""
    verts = tuple(window_vertices(tree, window))
    vert_set = set(verts)
    entries = {}
    for v in verts:
        p = parent(tree, v)
        if p is not None and p in vert_set:
            entries[v] = (p, weights.squared_at(v))
    return TruncatedOperator(verts, entries)


def matrix_power_norm(opr: TruncatedOperator, u: Vertex, n: int) -> Scalar:
    """||M^n e_u||^2 by n successive sparse applications.

    Amplitudes never interfere (one nonzero per row), so squared moduli
    propagate multiplicatively and the result is exact.
    """
    if u not in set(opr.vertices):
        raise ValueError(f"{u} not in the truncated window")
    vec: Dict[Vertex, Scalar] = {u: Fraction(1)}
    for _ in range(n):
        nxt: Dict[Vertex, Scalar] = {}
        for row, (col, w2) in opr.entries.items():
            if col in vec:
                nxt[row] = w2 * vec[col]
        vec = nxt
    total: Scalar = Fraction(0)
    for value in vec.values():
        total = total + value
    return total


def brute_consist6(tree, weights, measures, window: Window) -> Dict[Vertex, Scalar]:
    """Literal transcription of the consistency identity, vertex by vertex:
    residual(u) = max over atoms t of
        | mu_u({t}) - sum_{v in Chi(u)} |lambda_v|^2 (1/t) mu_v({t}) |
    with the t = 0 slot compared against eps_u (taken from the measure
    system when it carries eps values, else 0).
    """
    out: Dict[Vertex, Scalar] = {}
    for u in window_vertices(tree, window):
        mu_u = measures.measure_at(u) if hasattr(measures, "measure_at") else measures[u]
        eps_u = measures.eps_at(u) if hasattr(measures, "eps_at") else Fraction(0)
        view_u = atoms_view(mu_u, window.max_branch)
        kids = children(tree, u, window)
        kid_views = []
        for v in kids:
            mu_v = measures.measure_at(v) if hasattr(measures, "measure_at") else measures[v]
            kid_views.append((weights.squared_at(v), atoms_view(mu_v, window.max_branch)))

        atom_set = set(t for t, _ in view_u)
        for _, view in kid_views:
            atom_set |= set(t for t, _ in view)
        atom_set.add(Fraction(0))

        mags = []
        for t in sorted(atom_set):
            lhs: Scalar = Fraction(0)
            for loc, mass in view_u:
                if loc == t:
                    lhs = mass
            if t == 0:
                rhs: Scalar = eps_u
                for w2, view in kid_views:
                    for loc, mass in view:
                        zero_w2 = (isinstance(w2, Interval) and w2.lo == 0 and w2.hi == 0) or w2 == 0
                        if loc == 0 and not zero_w2:
                            hi = mass.hi if isinstance(mass, Interval) else mass
                            if hi > 0:
                                raise InfiniteTermError(
                                    f"1/t integral at t=0 with nonzero weight (vertex {u})"
                                )
            else:
                rhs = Fraction(0)
                for w2, view in kid_views:
                    for loc, mass in view:
                        if loc == t:
                            rhs = rhs + w2 * (Fraction(1) / t) * mass
            diff = lhs - rhs
            mags.append(diff.abs() if isinstance(diff, Interval) else abs(diff))
        if all(isinstance(m, Fraction) for m in mags):
            out[u] = max(mags) if mags else Fraction(0)
        else:
            widened = [m if isinstance(m, Interval) else Interval(m, m) for m in mags]
            out[u] = Interval(max(m.lo for m in widened), max(m.hi for m in widened))
    return out
