# src/solvers/graph_cut.py
"""Exact minimization of the binary shape energy by s-t minimum cut.

Node x on the sink side of the cut means theta_x = 1. Terminal capacities
use the nonnegative split of the unary term (alpha - f_x):

    source -> x : max(0, alpha - f_x)   (paid when theta_x = 1)
    x -> sink   : max(0, f_x - alpha)   (paid when theta_x = 0)

so that energy(theta) = cut(theta) + sum min(0, alpha - f_x).
"""
from collections import deque
from dataclasses import dataclass, field
from typing import List, Optional, TextIO, Tuple

import numpy as np

from config.settings import Config
from src.operators.energy import TvVariant, WeightLike, as_weight, shape_energy
from src.operators.grid_ops import as_field
from src.utils.errors import CertificateError, FieldFormatError, InvalidParameterError
from src.utils.logger import setup_logger

logger = setup_logger(__name__)

AXIS_OFFSETS = [(1, 0), (0, 1)]
DIAGONAL_OFFSETS = [(1, 0), (0, 1), (1, 1), (-1, 1)]


@dataclass(frozen=True)
class NeighborWeights:
    """Per-pixel pair weights, one plane per forward neighbour offset.

    The pair (x, x + offset) contributes scale * weights[k][x] * |theta_{x+offset} - theta_x|.
    The weight is owned by the base pixel, so w(x, y) != w(y, x) when g varies.
    """
    offsets: List[Tuple[int, int]]
    weights: np.ndarray
    scale: float


def neighbor_weights(g: np.ndarray, variant: TvVariant = TvVariant.DIAGONAL) -> NeighborWeights:
    """Axis neighbours weigh g, diagonal neighbours sqrt(2)/2 g"""
    if TvVariant(variant) is TvVariant.AXIS:
        return NeighborWeights(list(AXIS_OFFSETS), np.stack([g, g]), 1.0)
    diag = 0.5 * np.sqrt(2.0) * g
    return NeighborWeights(list(DIAGONAL_OFFSETS), np.stack([g, g, diag, diag]), 0.5)


@dataclass
class CutProblem:
    node_count: int
    source_caps: np.ndarray
    sink_caps: np.ndarray
    arc_from: np.ndarray
    arc_to: np.ndarray
    arc_caps: np.ndarray
    arc_rev_caps: np.ndarray
    # energy(labels) = cut capacity + constant
    constant: float = 0.0
    shape: Optional[Tuple[int, int]] = None

    def __post_init__(self):
        self.source_caps = np.asarray(self.source_caps, dtype=np.float64)
        self.sink_caps = np.asarray(self.sink_caps, dtype=np.float64)
        self.arc_from = np.asarray(self.arc_from, dtype=np.int64)
        self.arc_to = np.asarray(self.arc_to, dtype=np.int64)
        self.arc_caps = np.asarray(self.arc_caps, dtype=np.float64)
        self.arc_rev_caps = np.asarray(self.arc_rev_caps, dtype=np.float64)

        n = self.node_count
        if self.source_caps.shape != (n,) or self.sink_caps.shape != (n,):
            raise InvalidParameterError(f"terminal capacities must have {n} entries")
        m = self.arc_from.shape[0]
        if any(a.shape != (m,) for a in (self.arc_to, self.arc_caps, self.arc_rev_caps)):
            raise InvalidParameterError("arc arrays must have equal length")
        for caps in (self.source_caps, self.sink_caps, self.arc_caps, self.arc_rev_caps):
            if not np.all(np.isfinite(caps)) or np.any(caps < 0):
                raise InvalidParameterError("capacities must be finite and nonnegative")
        if m and (self.arc_from.min() < 0 or self.arc_to.min() < 0
                  or self.arc_from.max() >= n or self.arc_to.max() >= n):
            raise InvalidParameterError("arc references a node outside the graph")
        if np.any(self.arc_from == self.arc_to):
            raise InvalidParameterError("self-loops are not allowed")

    @property
    def arc_count(self) -> int:
        return int(self.arc_from.shape[0])

    def scaled(self, factor: float = Config.CUT_SCALE) -> 'CutProblem':
        """Capacities multiplied by factor and rounded to integers (held exactly in float64)"""
        return CutProblem(self.node_count,
                          np.rint(self.source_caps * factor), np.rint(self.sink_caps * factor),
                          self.arc_from.copy(), self.arc_to.copy(),
                          np.rint(self.arc_caps * factor), np.rint(self.arc_rev_caps * factor),
                          self.constant * factor, self.shape)

    def cut_capacity(self, sink_side: np.ndarray) -> float:
        """Capacity of the cut that puts the flagged nodes with the sink"""
        sink_side = np.asarray(sink_side, dtype=bool).ravel()
        total = np.sum(self.source_caps[sink_side]) + np.sum(self.sink_caps[~sink_side])
        forward = ~sink_side[self.arc_from] & sink_side[self.arc_to]
        backward = sink_side[self.arc_from] & ~sink_side[self.arc_to]
        total += np.sum(self.arc_caps[forward]) + np.sum(self.arc_rev_caps[backward])
        return float(total)


def build_cut_problem(f: np.ndarray, g: WeightLike, alpha: float,
                      variant: TvVariant = TvVariant.DIAGONAL) -> CutProblem:
    """Encode sum (alpha - f) theta + TV_g(theta) as a cut problem"""
    f = as_field(f)
    h, w = f.shape
    weight = as_weight(g, f.shape).values
    unary = (alpha - f).ravel()
    source_caps = np.maximum(unary, 0.0)
    sink_caps = np.maximum(-unary, 0.0)
    constant = float(np.sum(np.minimum(unary, 0.0)))

    index = np.arange(h * w).reshape(h, w)
    nw = neighbor_weights(weight, variant)
    froms, tos, caps = [], [], []
    for (di, dj), plane in zip(nw.offsets, nw.weights):
        # base pixels whose partner (i + di, j + dj) is on the grid
        rows = slice(max(0, -di), h - max(0, di))
        cols = slice(max(0, -dj), w - max(0, dj))
        partner_rows = slice(max(0, di), h - max(0, -di))
        partner_cols = slice(max(0, dj), w - max(0, -dj))
        froms.append(index[rows, cols].ravel())
        tos.append(index[partner_rows, partner_cols].ravel())
        caps.append(nw.scale * plane[rows, cols].ravel())

    arc_from = np.concatenate(froms) if froms else np.empty(0, dtype=np.int64)
    arc_to = np.concatenate(tos) if tos else np.empty(0, dtype=np.int64)
    arc_caps = np.concatenate(caps) if caps else np.empty(0)
    return CutProblem(h * w, source_caps, sink_caps, arc_from, arc_to,
                      arc_caps, arc_caps.copy(), constant, (h, w))


# parent markers
_TERMINAL = -1
_ORPHAN = -2
_NONE = -3
# tree membership
_FREE, _SOURCE, _SINK = 0, 1, 2


class _SearchTreeMaxFlow:
    """Augmenting paths found by two search trees (source and sink) that are
    kept between augmentations and repaired by adoption of orphans."""

    def __init__(self, problem: CutProblem):
        self.problem = problem
        n = problem.node_count
        self.head: List[int] = []
        self.rcap: List[float] = []
        self.out: List[List[int]] = [[] for _ in range(n)]
        for u, v, c, rc in zip(problem.arc_from.tolist(), problem.arc_to.tolist(),
                               problem.arc_caps.tolist(), problem.arc_rev_caps.tolist()):
            a = len(self.head)
            self.head.append(v)
            self.rcap.append(c)
            self.out[u].append(a)
            self.head.append(u)
            self.rcap.append(rc)
            self.out[v].append(a + 1)

        source = problem.source_caps.tolist()
        sink = problem.sink_caps.tolist()
        # positive: residual from the source, negative: residual to the sink
        self.tr = [s - t for s, t in zip(source, sink)]
        self.flow = float(sum(min(s, t) for s, t in zip(source, sink)))

        self.tree = [_FREE] * n
        self.parent = [_NONE] * n
        self.in_active = [False] * n
        self.active: deque = deque()
        self.orphans: deque = deque()
        self.augmentations = 0

    def _activate(self, node: int, front: bool = False):
        if not self.in_active[node]:
            self.in_active[node] = True
            if front:
                self.active.appendleft(node)
            else:
                self.active.append(node)

    def _grow(self, p: int) -> int:
        """Extend the tree of p by one layer; return a source-to-sink arc or -1"""
        head, rcap, tree, parent = self.head, self.rcap, self.tree, self.parent
        if tree[p] == _SOURCE:
            for a in self.out[p]:
                if rcap[a] > 0:
                    q = head[a]
                    if tree[q] == _FREE:
                        tree[q] = _SOURCE
                        parent[q] = a ^ 1
                        self._activate(q)
                    elif tree[q] == _SINK:
                        return a
        else:
            for a in self.out[p]:
                if rcap[a ^ 1] > 0:
                    q = head[a]
                    if tree[q] == _FREE:
                        tree[q] = _SINK
                        parent[q] = a ^ 1
                        self._activate(q)
                    elif tree[q] == _SOURCE:
                        return a ^ 1
        return -1

    def _augment(self, middle: int):
        head, rcap, parent, tr = self.head, self.rcap, self.parent, self.tr
        s_node = head[middle ^ 1]
        t_node = head[middle]

        bottleneck = rcap[middle]
        i = s_node
        while parent[i] != _TERMINAL:
            a = parent[i]
            bottleneck = min(bottleneck, rcap[a ^ 1])
            i = head[a]
        bottleneck = min(bottleneck, tr[i])
        i = t_node
        while parent[i] != _TERMINAL:
            a = parent[i]
            bottleneck = min(bottleneck, rcap[a])
            i = head[a]
        bottleneck = min(bottleneck, -tr[i])

        rcap[middle] -= bottleneck
        rcap[middle ^ 1] += bottleneck

        i = s_node
        while parent[i] != _TERMINAL:
            a = parent[i]
            nxt = head[a]
            rcap[a ^ 1] -= bottleneck
            rcap[a] += bottleneck
            if rcap[a ^ 1] <= 0:
                rcap[a ^ 1] = 0.0
                self._make_orphan(i)
            i = nxt
        tr[i] -= bottleneck
        if tr[i] <= 0:
            tr[i] = 0.0
            self._make_orphan(i)

        i = t_node
        while parent[i] != _TERMINAL:
            a = parent[i]
            nxt = head[a]
            rcap[a] -= bottleneck
            rcap[a ^ 1] += bottleneck
            if rcap[a] <= 0:
                rcap[a] = 0.0
                self._make_orphan(i)
            i = nxt
        tr[i] += bottleneck
        if tr[i] >= 0:
            tr[i] = 0.0
            self._make_orphan(i)

        self.flow += bottleneck
        self.augmentations += 1

    def _make_orphan(self, node: int):
        self.parent[node] = _ORPHAN
        self.orphans.append(node)

    def _rooted(self, node: int) -> bool:
        """True when the parent chain of node reaches a terminal"""
        parent, head = self.parent, self.head
        while True:
            a = parent[node]
            if a == _TERMINAL:
                return True
            if a < 0:
                return False
            node = head[a]

    def _adopt(self):
        head, rcap, tree, parent = self.head, self.rcap, self.tree, self.parent
        while self.orphans:
            p = self.orphans.popleft()
            t = tree[p]
            new_parent = _NONE
            for a in self.out[p]:
                q = head[a]
                if tree[q] != t:
                    continue
                residual = rcap[a ^ 1] if t == _SOURCE else rcap[a]
                if residual > 0 and self._rooted(q):
                    new_parent = a
                    break
            if new_parent != _NONE:
                parent[p] = new_parent
                continue

            for a in self.out[p]:
                q = head[a]
                if tree[q] != t:
                    continue
                residual = rcap[a ^ 1] if t == _SOURCE else rcap[a]
                if residual > 0:
                    self._activate(q)
                qa = parent[q]
                if qa >= 0 and head[qa] == p:
                    self._make_orphan(q)
            tree[p] = _FREE
            parent[p] = _NONE

    def run(self) -> float:
        for i, cap in enumerate(self.tr):
            if cap > 0:
                self.tree[i] = _SOURCE
            elif cap < 0:
                self.tree[i] = _SINK
            else:
                continue
            self.parent[i] = _TERMINAL
            self._activate(i)

        while self.active:
            p = self.active.popleft()
            self.in_active[p] = False
            if self.tree[p] == _FREE:
                continue
            middle = self._grow(p)
            if middle < 0:
                continue
            # p may still have unexplored arcs
            self._activate(p, front=True)
            self._augment(middle)
            self._adopt()
        return self.flow

    def source_reachable(self) -> np.ndarray:
        """Nodes reachable from the source in the residual graph"""
        n = self.problem.node_count
        seen = [False] * n
        queue = deque(i for i in range(n) if self.tr[i] > 0)
        for i in queue:
            seen[i] = True
        while queue:
            p = queue.popleft()
            for a in self.out[p]:
                q = self.head[a]
                if not seen[q] and self.rcap[a] > 0:
                    seen[q] = True
                    queue.append(q)
        return np.array(seen, dtype=bool)

    def sink_reaching(self) -> np.ndarray:
        """Nodes that can still reach the sink in the residual graph"""
        n = self.problem.node_count
        seen = [False] * n
        queue = deque(i for i in range(n) if self.tr[i] < 0)
        for i in queue:
            seen[i] = True
        while queue:
            p = queue.popleft()
            for a in self.out[p]:
                q = self.head[a]
                # q -> p is the reverse of arc a
                if not seen[q] and self.rcap[a ^ 1] > 0:
                    seen[q] = True
                    queue.append(q)
        return np.array(seen, dtype=bool)


def max_flow(problem: CutProblem) -> Tuple[float, np.ndarray]:
    """Maximum flow value and minimum-cut labels (True = sink side).

    Only nodes that can still reach the sink in the residual graph go to
    the sink side, which gives the smallest minimum cut on that side. The
    flow value is checked against the capacity of that cut.
    """
    solver = _SearchTreeMaxFlow(problem)
    flow = solver.run()

    sink_side = solver.sink_reaching()
    if np.any(sink_side & solver.source_reachable()):
        raise CertificateError("an augmenting path remains in the residual graph")
    capacity = problem.cut_capacity(sink_side)
    scale = max(1.0, float(np.sum(problem.source_caps) + np.sum(problem.arc_caps)
                            + np.sum(problem.arc_rev_caps)))
    if abs(capacity - flow) > 1e-9 * scale:
        raise CertificateError(f"flow {flow!r} differs from cut capacity {capacity!r}")

    logger.debug(f"max flow {flow:.6g} on {problem.node_count} nodes / {problem.arc_count} arcs "
                 f"after {solver.augmentations} augmentations")
    return flow, sink_side


def cut_segment(f: np.ndarray, g: WeightLike, alpha: float,
                variant: TvVariant = TvVariant.DIAGONAL,
                integer_capacities: bool = False) -> Tuple[np.ndarray, float]:
    """Globally minimizing mask for the shape energy and its independently evaluated energy"""
    f = as_field(f)
    weight = as_weight(g, f.shape)
    problem = build_cut_problem(f, weight, alpha, variant)
    if integer_capacities:
        problem = problem.scaled(Config.CUT_SCALE)
    logger.info(f"Graph cut on {f.shape[0]}x{f.shape[1]} grid, alpha={alpha}, variant={TvVariant(variant).value}")
    _, sink_side = max_flow(problem)
    mask = sink_side.reshape(f.shape)
    return mask, shape_energy(mask, f, weight, alpha, variant)


def dump_problem(problem: CutProblem, stream: TextIO):
    """Write "nodes arcs", one "source sink" line per node, one "from to cap rev" line per arc"""
    stream.write(f"{problem.node_count} {problem.arc_count}\n")
    for s, t in zip(problem.source_caps.tolist(), problem.sink_caps.tolist()):
        stream.write(f"{s!r} {t!r}\n")
    for u, v, c, rc in zip(problem.arc_from.tolist(), problem.arc_to.tolist(),
                           problem.arc_caps.tolist(), problem.arc_rev_caps.tolist()):
        stream.write(f"{u} {v} {c!r} {rc!r}\n")


def load_problem(stream: TextIO) -> CutProblem:
    """Read the format written by dump_problem"""
    lines = [line.split() for line in stream if line.strip()]
    try:
        n, m = int(lines[0][0]), int(lines[0][1])
        terminals = np.array([[float(a), float(b)] for a, b in lines[1:1 + n]]).reshape(n, 2)
        arcs = lines[1 + n:1 + n + m]
        if len(arcs) != m:
            raise ValueError(f"expected {m} arc lines, found {len(arcs)}")
        arc_from = [int(a[0]) for a in arcs]
        arc_to = [int(a[1]) for a in arcs]
        caps = [float(a[2]) for a in arcs]
        rev = [float(a[3]) for a in arcs]
    except (IndexError, ValueError) as e:
        raise FieldFormatError(f"malformed cut problem dump: {e}") from e
    return CutProblem(n, terminals[:, 0], terminals[:, 1],
                      np.array(arc_from, dtype=np.int64), np.array(arc_to, dtype=np.int64),
                      np.array(caps), np.array(rev))
