"""Sum/sub/product computation DAGs with exact values and martingale analysis.

Each node carries its exact rational value plus the two quantities the
probabilistic bound needs: the martingale length L (0 at inputs, max+1
across additions and subtractions, sum+1 across multiplications) and the
condition bound K (1 at inputs, absolute-value-weighted mean across
additions, product across multiplications).  Both are fixed at node
creation, so analysis is a lookup.

A multiplication whose operands share a rounding-error variable breaks
the martingale model; ``mul`` refuses to build one and
``validate_martingale_inducing`` re-checks a finished dag.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import NamedTuple, Optional

from .bounds import Analysis, ConditionUndefined
from .fp_core import FpFormat


class NodeKind(Enum):
    INPUT = "input"
    ADD = "add"
    SUB = "sub"
    MUL = "mul"


@dataclass(frozen=True, slots=True)
class Node:
    id: int
    kind: NodeKind
    children: tuple[int, ...]  # () for inputs, (left, right) otherwise
    exact: Fraction
    L: int
    K: Optional[Fraction]  # None once an exact zero sum poisons the path


class BiasedMultiplication(ValueError):
    """Multiplying operands that share a rounding error; the product's
    error process is not a martingale and the analysis does not apply."""

    def __init__(self, x: int, y: int, witness: int, span=None):
        self.x = x
        self.y = y
        self.witness = witness
        self.span = span
        where = f" at {span}" if span is not None else ""
        super().__init__(
            f"operands {x} and {y} share the rounding error of node {witness}{where}"
        )


class Violation(NamedTuple):
    mul_id: int
    shared_id: int


class Dag:
    """Append-only builder; children always precede parents, so the node
    list is already in topological order.  freeze() locks the structure."""

    def __init__(self) -> None:
        self._nodes: list[Node] = []
        self._outputs: dict[str, int] = {}
        self._err_sets: dict[int, frozenset[int]] = {}
        self._frozen = False

    @property
    def nodes(self) -> list[Node]:
        return self._nodes

    @property
    def outputs(self) -> dict[str, int]:
        return dict(self._outputs)

    def __len__(self) -> int:
        return len(self._nodes)

    def _mutable(self) -> None:
        if self._frozen:
            raise RuntimeError("dag is frozen")

    def _check_id(self, i: int) -> None:
        if not 0 <= i < len(self._nodes):
            raise ValueError(f"no node with id {i}")

    def input(self, value) -> int:
        self._mutable()
        try:
            exact = Fraction(value)
        except (ValueError, OverflowError, TypeError) as e:
            raise ValueError(f"input value must be a finite rational, got {value!r}") from e
        nid = len(self._nodes)
        self._nodes.append(Node(nid, NodeKind.INPUT, (), exact, 0, Fraction(1)))
        return nid

    def add(self, x: int, y: int) -> int:
        return self._binary(NodeKind.ADD, x, y)

    def sub(self, x: int, y: int) -> int:
        return self._binary(NodeKind.SUB, x, y)

    def mul(self, x: int, y: int) -> int:
        self._check_id(x)
        self._check_id(y)
        shared = self.err_set(x) & self.err_set(y)
        if shared:
            raise BiasedMultiplication(x, y, min(shared))
        return self._binary(NodeKind.MUL, x, y)

    def _mul_unchecked(self, x: int, y: int) -> int:
        # diagnostic path: builds the product without the independence guard,
        # so validate_martingale_inducing has something to find
        return self._binary(NodeKind.MUL, x, y)

    def _binary(self, kind: NodeKind, x: int, y: int) -> int:
        self._mutable()
        self._check_id(x)
        self._check_id(y)
        nx, ny = self._nodes[x], self._nodes[y]
        if kind is NodeKind.MUL:
            exact = nx.exact * ny.exact
            length = nx.L + ny.L + 1
            cond = None if nx.K is None or ny.K is None else nx.K * ny.K
        else:
            exact = nx.exact + ny.exact if kind is NodeKind.ADD else nx.exact - ny.exact
            length = max(nx.L, ny.L) + 1
            if exact == 0 or nx.K is None or ny.K is None:
                cond = None
            else:
                cond = (abs(nx.exact) * nx.K + abs(ny.exact) * ny.K) / abs(exact)
        nid = len(self._nodes)
        self._nodes.append(Node(nid, kind, (x, y), exact, length, cond))
        return nid

    def set_output(self, name: str, node_id: int) -> None:
        self._mutable()
        self._check_id(node_id)
        if name in self._outputs:
            raise ValueError(f"duplicate output name {name!r}")
        self._outputs[name] = node_id

    def freeze(self) -> "Dag":
        self._frozen = True
        return self

    def err_set(self, node_id: int) -> frozenset[int]:
        """Operation-node ids whose rounding errors influence this node.

        Computed lazily and memoized; subgraphs never change once built,
        so filling the cache during construction is safe.
        """
        self._check_id(node_id)
        memo = self._err_sets
        stack = [node_id]
        while stack:
            i = stack[-1]
            if i in memo:
                stack.pop()
                continue
            node = self._nodes[i]
            if node.kind is NodeKind.INPUT:
                memo[i] = frozenset()
                stack.pop()
                continue
            pending = [c for c in node.children if c not in memo]
            if pending:
                stack.extend(pending)
                continue
            memo[i] = frozenset((i,)).union(*(memo[c] for c in node.children))
            stack.pop()
        return memo[node_id]

    def serialize(self) -> str:
        """One node per line: id, kind, child ids (or dashes), exact num/den."""
        lines = []
        for n in self._nodes:
            c0, c1 = (str(n.children[0]), str(n.children[1])) if n.children else ("-", "-")
            lines.append(f"{n.id} {n.kind.value} {c0} {c1} "
                         f"{n.exact.numerator}/{n.exact.denominator}")
        return "".join(line + "\n" for line in lines)


def analyze(dag: Dag, node_id: int, fmt: FpFormat) -> Analysis:
    """Memoized (L, K) of the node plus the format's unit roundoff."""
    if not 0 <= node_id < len(dag.nodes):
        raise ValueError(f"no node with id {node_id}")
    node = dag.nodes[node_id]
    if node.K is None:
        raise ConditionUndefined(
            f"node {node_id} sums to exact zero somewhere upstream; "
            "its condition bound is undefined"
        )
    return Analysis(node.L, node.K, fmt.u)


def validate_martingale_inducing(dag: Dag) -> list[Violation]:
    """Empty iff no multiplication's operands share a rounding error."""
    out = []
    for node in dag.nodes:
        if node.kind is NodeKind.MUL:
            shared = dag.err_set(node.children[0]) & dag.err_set(node.children[1])
            if shared:
                out.append(Violation(node.id, min(shared)))
    return out
