"""Ordering of monomial exponentials with product caching.

Monomials of degree >= 2 form a tree: the parent of ``Q_a Q_b ... Q_z`` (factors
sorted) is the same product without its last factor. A depth-first walk from
the degree-2 nodes keeps exactly one live product per degree: a node's product
is computed from its parent's cached product and one mode register, reused by
the whole subtree, and uncomputed when the walk leaves it. Intermediate nodes
that are not themselves terms are computed and released without a phase.

Constant and linear terms need no product register and are emitted first.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..model import MultiIndex


@dataclass(frozen=True)
class Step:
    """One schedule directive.

    ``kind`` is ``"term"`` (exponentiate ``monomial``), ``"compute"`` (form
    the product for ``monomial`` in the degree-``level`` cache from
    ``parent`` times mode ``mode``) or ``"release"`` (uncompute it).
    """

    kind: str
    monomial: MultiIndex
    level: int = 0
    parent: MultiIndex | None = None
    mode: int | None = None

    def __str__(self):
        if self.kind == "term":
            return str(self.monomial)
        if self.kind == "compute":
            return f"cache({self.parent}*Q{self.mode})"
        return f"release({self.monomial})"


def parent_of(alpha: MultiIndex) -> tuple[MultiIndex, int]:
    f = alpha.factors()
    return MultiIndex.from_factors(f[:-1]), f[-1]


def schedule_monomials(terms, caching: bool = True) -> list:
    """Order ``terms`` (MultiIndex set) with compute/release directives."""
    terms = sorted(set(terms))
    low = [a for a in terms if a.degree <= 1]
    high = [a for a in terms if a.degree >= 2]
    out = [Step("term", a, a.degree) for a in sorted(low, key=lambda a: (a.degree, a))]
    if not caching:
        for a in high:
            f = a.factors()
            chain = [MultiIndex.from_factors(f[:L]) for L in range(2, a.degree + 1)]
            for node in chain:
                p, r = parent_of(node)
                out.append(Step("compute", node, node.degree, p, r))
            out.append(Step("term", a, a.degree))
            for node in reversed(chain):
                out.append(Step("release", node, node.degree))
        return out

    is_term = set(high)
    nodes = set()
    for a in high:
        f = a.factors()
        nodes.update(MultiIndex.from_factors(f[:L]) for L in range(2, a.degree + 1))
    children: dict = {}
    for node in nodes:
        if node.degree > 2:
            children.setdefault(parent_of(node)[0], []).append(node)

    def visit(node):
        p, r = parent_of(node)
        out.append(Step("compute", node, node.degree, p, r))
        if node in is_term:
            out.append(Step("term", node, node.degree))
        for child in sorted(children.get(node, [])):
            visit(child)
        out.append(Step("release", node, node.degree))

    for root in sorted(n for n in nodes if n.degree == 2):
        visit(root)
    return out


def max_live_per_degree(schedule) -> int:
    """Largest number of simultaneously live caches of one degree (1 for a valid schedule)."""
    live: dict = {}
    worst = 0
    for s in schedule:
        if s.kind == "compute":
            live[s.level] = live.get(s.level, 0) + 1
            worst = max(worst, live[s.level])
        elif s.kind == "release":
            live[s.level] -= 1
    return worst
