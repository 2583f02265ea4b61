"""Exchange matrices, mutation and exchange graphs.

Labels are 0-based throughout.  A seed is stored as a pair ``(B, G)`` where
``B`` is the exchange matrix and column ``j`` of ``G`` is the tropical image of
the ``j``-th basis covector of the base vertex.  Two seeds are the same vertex
when their pairs agree after a simultaneous relabeling.
"""

from __future__ import annotations

import itertools
import json
from collections import Counter, deque
from dataclasses import dataclass
from typing import Callable, Iterator, Sequence

import numpy as np
from sympy.polys.domains import QQ
from sympy.polys.fields import field

DEFAULT_CAP = 100_000


class CapExceeded(RuntimeError):
    """More seeds were discovered than the enumeration cap allows."""


class OracleRankError(ValueError):
    """The rational-function oracle only handles small ranks."""


def check_exchange_matrix(v) -> np.ndarray:
    """Validate a skew-symmetric integer matrix and return it as int64."""
    arr = np.asarray(v)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
        raise ValueError(f"exchange matrix must be square and non-empty, got shape {arr.shape}")
    if arr.dtype.kind not in "iu":
        if not np.all(np.equal(np.mod(arr.astype(float), 1), 0)):
            raise ValueError("exchange matrix must have integer entries")
    arr = arr.astype(np.int64)
    if not np.array_equal(arr, -arr.T):
        raise ValueError("exchange matrix must be skew-symmetric")
    return arr


def _check_index(n: int, k: int) -> int:
    if not isinstance(k, (int, np.integer)) or not 0 <= k < n:
        raise IndexError(f"edge index {k} out of range for rank {n}")
    return int(k)


def mutate_exchange_matrix(v, k: int) -> np.ndarray:
    """Mutate ``v`` at ``k``; labels stay in place."""
    v = check_exchange_matrix(v)
    n = v.shape[0]
    k = _check_index(n, k)
    out = v.copy()
    for j in range(n):
        for l in range(n):
            if k in (j, l):
                out[j, l] = -v[j, l]
            elif v[j, k] >= 0 and v[k, l] >= 0:
                out[j, l] = v[j, l] + v[j, k] * v[k, l]
            elif v[j, k] <= 0 and v[k, l] <= 0:
                out[j, l] = v[j, l] - v[j, k] * v[k, l]
    return out


def tropical_edge_map(v, k: int, w: Sequence) -> list:
    """Tropical coordinate change across edge ``k`` (max-plus mutation).

    The output is indexed by the labels of the source seed; relabeling across
    the edge is the caller's job.
    """
    v = np.asarray(v)
    n = len(w)
    k = _check_index(n, k)
    row = [int(x) for x in v[k]]
    wk = w[k]
    out = []
    for j in range(n):
        if j == k:
            out.append(-wk)
        elif row[j] >= 0:
            out.append(w[j] + row[j] * max(0, wk))
        else:
            out.append(w[j] + row[j] * max(0, -wk))
    return out


def _canonical_order(G: np.ndarray) -> list[int]:
    # rows of an invertible G are distinct, so sorting them fixes a unique
    # relabeling; descending order keeps the identity matrix in place.
    return sorted(range(G.shape[0]), key=lambda j: tuple(G[j]), reverse=True)


@dataclass(frozen=True, eq=False)
class Seed:
    B: np.ndarray
    G: np.ndarray

    def key(self) -> tuple[bytes, bytes]:
        return self.B.tobytes(), self.G.tobytes()


@dataclass(eq=False)
class ExchangeGraph:
    """A finite exchange graph.

    ``targets[s, i]`` is the vertex across edge ``i`` of ``s`` and
    ``rhos[s, i]`` maps each label of ``s`` to the matching label there.
    """

    seeds: list[Seed]
    targets: np.ndarray
    rhos: np.ndarray
    base: int = 0

    def __post_init__(self):
        self._parents = None

    @property
    def rank(self) -> int:
        return int(self.seeds[0].B.shape[0])

    def __len__(self) -> int:
        return len(self.seeds)

    @property
    def vertices(self) -> range:
        return range(len(self.seeds))

    def exchange_matrix(self, s: int) -> np.ndarray:
        return self.seeds[s].B

    def target(self, s: int, i: int) -> int:
        return int(self.targets[s, i])

    def rho(self, s: int, i: int) -> tuple[int, ...]:
        return tuple(int(x) for x in self.rhos[s, i])

    def reverse_edge(self, s: int, i: int) -> tuple[int, int]:
        """The edge ``ε(i)``: its source vertex and label."""
        return self.target(s, i), int(self.rhos[s, i][i])

    def edges(self) -> Iterator[tuple[int, int, int, tuple[int, ...]]]:
        for s in self.vertices:
            for i in range(self.rank):
                yield s, i, self.target(s, i), self.rho(s, i)

    def _tree(self) -> list:
        if self._parents is None:
            parents: list = [None] * len(self)
            parents[self.base] = (-1, -1)
            queue = deque([self.base])
            while queue:
                s = queue.popleft()
                for i in range(self.rank):
                    t = self.target(s, i)
                    if parents[t] is None:
                        parents[t] = (s, i)
                        queue.append(t)
            self._parents = parents
        return self._parents

    def _root_path(self, s: int) -> list[int]:
        parents = self._tree()
        chain = [s]
        while chain[-1] != self.base:
            chain.append(parents[chain[-1]][0])
        return chain[::-1]

    def path(self, s1: int, s2: int) -> list[tuple[int, int]]:
        """Deterministic path as a list of ``(vertex, edge label)`` steps.

        Goes up the base-rooted BFS tree from ``s1`` to the deepest common
        ancestor, then down to ``s2``.
        """
        parents = self._tree()
        up, down = self._root_path(s1), self._root_path(s2)
        common = 0
        while common < min(len(up), len(down)) and up[common] == down[common]:
            common += 1
        steps = []
        for c in reversed(up[common:]):
            p, k = parents[c]
            steps.append(self.reverse_edge(p, k))
        for c in down[common:]:
            steps.append(parents[c])
        return steps

    def transport(self, s1: int, s2: int, w: Sequence,
                  edge_map: Callable, steps: Sequence[tuple[int, int]] | None = None) -> list:
        """Push coordinates from chart ``s1`` to chart ``s2`` edge by edge.

        ``edge_map(B, k, w)`` returns coordinates in the source labels; the
        relabeling ``ρ`` is applied here.
        """
        cur = list(w)
        at = s1
        for s, i in (self.path(s1, s2) if steps is None else steps):
            if s != at:
                raise ValueError("steps do not form a path")
            naive = edge_map(self.seeds[s].B, i, cur)
            rho = self.rhos[s, i]
            cur = [None] * len(naive)
            for j, x in enumerate(naive):
                cur[rho[j]] = x
            at = self.target(s, i)
        if at != s2:
            raise ValueError("steps do not end at the requested vertex")
        return cur

    def walk(self, s: int, word: Sequence[int]) -> list[tuple[int, int]]:
        """Steps obtained by following edge labels of ``word`` from ``s``."""
        steps = []
        for i in word:
            steps.append((s, int(i)))
            s = self.target(s, i)
        return steps

    # serialization -----------------------------------------------------
    def to_json(self) -> dict:
        return {
            "n": self.rank,
            "base": self.base,
            "vertices": [{"id": s, "B": seed.B.tolist(), "G": seed.G.tolist()}
                         for s, seed in enumerate(self.seeds)],
            "edges": [{"src": s, "dst": t, "edge": i, "rho": list(rho)}
                      for s, i, t, rho in self.edges()],
        }

    def to_dot(self) -> str:
        lines = ["graph exchange {"]
        for s in self.vertices:
            lines.append(f"  {s};")
        for s, i, t, rho in self.edges():
            if (s, i) <= self.reverse_edge(s, i) or s == t:
                lines.append(f'  {s} -- {t} [label="{i}/{rho[i]}"];')
        lines.append("}")
        return "\n".join(lines)


def quiver_from_json(data: dict | str) -> np.ndarray:
    if isinstance(data, str):
        data = json.loads(data)
    v = check_exchange_matrix(data["v"])
    if "n" in data and int(data["n"]) != v.shape[0]:
        raise ValueError("quiver rank does not match matrix size")
    return v


def dynkin_exchange_matrix(name: str) -> np.ndarray:
    """Exchange matrix of a Dynkin diagram, edges oriented from smaller to larger label.

    Accepts ``A<n>``, ``D<n>`` (n >= 4), ``E6``-``E8`` and products joined by ``x``
    such as ``A1xA1``.
    """
    blocks = []
    for part in name.upper().replace("×", "X").split("X"):
        kind, size = part[0], int(part[1:])
        if kind == "A" and size >= 1:
            edges = [(i, i + 1) for i in range(size - 1)]
        elif kind == "D" and size >= 4:
            edges = [(i, i + 1) for i in range(size - 2)] + [(size - 3, size - 1)]
        elif kind == "E" and size in (6, 7, 8):
            edges = [(i, i + 1) for i in range(size - 2)] + [(2, size - 1)]
        else:
            raise ValueError(f"unknown Dynkin type {part!r}")
        v = np.zeros((size, size), dtype=np.int64)
        for i, j in edges:
            v[i, j], v[j, i] = 1, -1
        blocks.append(v)
    n = sum(b.shape[0] for b in blocks)
    out = np.zeros((n, n), dtype=np.int64)
    at = 0
    for b in blocks:
        k = b.shape[0]
        out[at:at + k, at:at + k] = b
        at += k
    return out


def g_matrix_step(B: np.ndarray, k: int, G: np.ndarray) -> np.ndarray:
    cols = [tropical_edge_map(B, k, [int(x) for x in G[:, j]]) for j in range(G.shape[1])]
    return np.array(cols, dtype=np.int64).T


def enumerate_exchange_graph(v, cap: int = DEFAULT_CAP) -> ExchangeGraph:
    """Breadth-first enumeration of the exchange graph of ``v``.

    Raises :class:`CapExceeded` once more than ``cap`` seeds appear.
    """
    v = check_exchange_matrix(v)
    if cap < 1:
        raise ValueError("cap must be positive")
    n = v.shape[0]
    seeds = [Seed(v, np.eye(n, dtype=np.int64))]
    index = {seeds[0].key(): 0}
    targets: list[list[int]] = [[-1] * n]
    rhos: list[list] = [[None] * n]

    s = 0
    while s < len(seeds):
        B, G = seeds[s].B, seeds[s].G
        for k in range(n):
            if targets[s][k] >= 0:
                continue
            B1 = mutate_exchange_matrix(B, k)
            G1 = g_matrix_step(B, k, G)
            order = _canonical_order(G1)
            pos = [0] * n
            for new, old in enumerate(order):
                pos[old] = new
            cand = Seed(B1[np.ix_(order, order)], G1[order])
            t = index.get(cand.key())
            if t is None:
                t = len(seeds)
                if t >= cap:
                    raise CapExceeded(f"more than {cap} seeds discovered")
                seeds.append(cand)
                index[cand.key()] = t
                targets.append([-1] * n)
                rhos.append([None] * n)
            targets[s][k] = t
            rhos[s][k] = pos
            back = pos[k]
            inv = [0] * n
            for j, p in enumerate(pos):
                inv[p] = j
            if targets[t][back] >= 0:
                if targets[t][back] != s or list(rhos[t][back]) != inv:
                    raise RuntimeError("inconsistent edge identification")
            targets[t][back] = s
            rhos[t][back] = inv
        s += 1
    return ExchangeGraph(seeds, np.array(targets, dtype=np.int64),
                         np.array(rhos, dtype=np.int64), base=0)


def recompute_tropical_data(E: ExchangeGraph, v_base) -> ExchangeGraph:
    """Same graph and ``ρ`` with new base exchange matrix; G recomputed."""
    n = E.rank
    Bs: list = [None] * len(E)
    Gs: list = [None] * len(E)
    Bs[E.base] = check_exchange_matrix(v_base)
    Gs[E.base] = np.eye(n, dtype=np.int64)
    for c in _bfs_order(E):
        if c == E.base:
            continue
        p, k = E._tree()[c]
        B1 = mutate_exchange_matrix(Bs[p], k)
        G1 = g_matrix_step(Bs[p], k, Gs[p])
        rho = E.rhos[p, k]
        inv = np.argsort(rho)
        Bs[c] = B1[np.ix_(inv, inv)]
        Gs[c] = G1[inv]
    return ExchangeGraph([Seed(b, g) for b, g in zip(Bs, Gs)], E.targets.copy(), E.rhos.copy(), E.base)


def _bfs_order(E: ExchangeGraph) -> list[int]:
    parents = E._tree()
    depth = {E.base: 0}
    order = [E.base]
    queue = deque([E.base])
    while queue:
        s = queue.popleft()
        for i in range(E.rank):
            t = E.target(s, i)
            if t not in depth and parents[t] == (s, i):
                depth[t] = depth[s] + 1
                order.append(t)
                queue.append(t)
    return order


def opposite_graph(E: ExchangeGraph) -> ExchangeGraph:
    """Same vertices, edges and ``ρ`` with every exchange matrix negated."""
    return recompute_tropical_data(E, -E.seeds[E.base].B)


def check_edge_data(E: ExchangeGraph) -> list[str]:
    """Structural checks on a graph: ρ consistency, mutation rule, det G."""
    problems = []
    for s, i, t, rho in E.edges():
        back_t, back_i = E.reverse_edge(s, i)
        if rho[i] != back_i or E.target(t, back_i) != s:
            problems.append(f"edge ({s},{i}): reverse edge mismatch")
        rb = E.rho(t, back_i)
        if any(rb[rho[j]] != j for j in range(E.rank)):
            problems.append(f"edge ({s},{i}): rho of reverse edge is not the inverse")
        B1 = mutate_exchange_matrix(E.seeds[s].B, i)
        Bt = E.seeds[t].B
        if any(Bt[rho[j], rho[k]] != B1[j, k] for j in range(E.rank) for k in range(E.rank)):
            problems.append(f"edge ({s},{i}): exchange matrix does not follow mutation")
    for s, seed in enumerate(E.seeds):
        if abs(round(np.linalg.det(seed.G))) != 1:
            problems.append(f"vertex {s}: det G != ±1")
    return problems


def sign_coherence_violations(E: ExchangeGraph) -> list[int]:
    """Vertices whose G matrix has a row of mixed sign.

    Rows of G list the ``i``-th coordinate of all basis images, so a mixed
    row means the cone does not sit in a single orthant.
    """
    bad = []
    for s, seed in enumerate(E.seeds):
        for row in seed.G:
            if (row > 0).any() and (row < 0).any():
                bad.append(s)
                break
    return bad


# ----------------------------------------------------------------------
# oracle

def _fz_mutation(b: list[list[int]], k: int) -> list[list[int]]:
    n = len(b)
    return [[-b[i][j] if k in (i, j) else
             b[i][j] + (abs(b[i][k]) * b[k][j] + b[i][k] * abs(b[k][j])) // 2
             for j in range(n)] for i in range(n)]


def oracle_y_pattern(v, word: Sequence[int]) -> tuple:
    """Y-variables after mutating along ``word``, as exact rational functions.

    Independent of the graph machinery: uses the Fomin-Zelevinsky form of
    matrix mutation and sympy's sparse rational function field, whose
    elements are kept in canonical reduced form.
    """
    v = check_exchange_matrix(v)
    n = v.shape[0]
    if n > 3:
        raise OracleRankError("the rational-function oracle supports rank <= 3")
    _, *xs = field(",".join(f"x{i + 1}" for i in range(n)), QQ)
    y = list(xs)
    b = v.tolist()
    for k in word:
        k = _check_index(n, k)
        new = []
        for j in range(n):
            if j == k:
                new.append(1 / y[k])
            elif b[k][j] >= 0:
                new.append(y[j] * (1 + y[k]) ** b[k][j])
            else:
                new.append(y[j] * (1 + 1 / y[k]) ** b[k][j])
        y = new
        b = _fz_mutation(b, k)
    return tuple(y)


@dataclass
class SeedIdentityReport:
    states: int
    vertices_reached: int
    disagreements: list[str]

    @property
    def ok(self) -> bool:
        return not self.disagreements


def validate_seed_identity(E: ExchangeGraph, depth: int) -> SeedIdentityReport:
    """Compare graph merges with oracle Y-tuples over all reduced words.

    Every word of length at most ``depth`` with no immediate repetition is
    followed both in the graph and in the oracle.  Two words must land on
    the same vertex exactly when their Y-tuples agree up to permutation, and
    in that case the graph's label bookkeeping must produce that permutation.
    """
    v = E.seeds[E.base].B
    n = E.rank
    by_vertex: dict[int, tuple] = {}
    by_multiset: dict[frozenset, int] = {}
    problems = []
    count = 0
    words: list[tuple[int, ...]] = [()]
    frontier: list[tuple[int, ...]] = [()]
    for _ in range(depth):
        frontier = [w + (k,) for w in frontier for k in range(n) if not w or w[-1] != k]
        words.extend(frontier)
    for word in words:
        count += 1
        y = oracle_y_pattern(v, word)
        s = E.base
        labels = list(range(n))
        for k in word:
            i = labels[k]
            rho = E.rho(s, i)
            s = E.target(s, i)
            labels = [rho[x] for x in labels]
        in_graph = [None] * n
        for j, lab in enumerate(labels):
            in_graph[lab] = y[j]
        in_graph = tuple(in_graph)
        multiset = frozenset(Counter(y).items())
        if s in by_vertex and by_vertex[s] != in_graph:
            problems.append(f"word {word}: vertex {s} reached with different Y-tuple")
        by_vertex.setdefault(s, in_graph)
        other = by_multiset.setdefault(multiset, s)
        if other != s:
            problems.append(f"word {word}: Y-tuple equals that of vertex {other} but graph says {s}")
    return SeedIdentityReport(count, len(by_vertex), problems)


# ----------------------------------------------------------------------
# automorphisms

@dataclass(frozen=True)
class GraphAutomorphism:
    """Vertex map plus, for each vertex, a label bijection onto its image."""

    vertex_map: tuple[int, ...]
    label_maps: tuple[tuple[int, ...], ...]

    def __call__(self, s: int) -> int:
        return self.vertex_map[s]

    def labels(self, s: int) -> tuple[int, ...]:
        return self.label_maps[s]

    def compose(self, other: "GraphAutomorphism") -> "GraphAutomorphism":
        """``self ∘ other``."""
        vm = tuple(self.vertex_map[other.vertex_map[s]] for s in range(len(self.vertex_map)))
        lm = tuple(tuple(self.label_maps[other.vertex_map[s]][other.label_maps[s][j]]
                         for j in range(len(other.label_maps[s])))
                   for s in range(len(self.vertex_map)))
        return GraphAutomorphism(vm, lm)

    def inverse(self) -> "GraphAutomorphism":
        V = len(self.vertex_map)
        vm = [0] * V
        lm: list = [None] * V
        for s in range(V):
            t = self.vertex_map[s]
            vm[t] = s
            inv = [0] * len(self.label_maps[s])
            for j, k in enumerate(self.label_maps[s]):
                inv[k] = j
            lm[t] = tuple(inv)
        return GraphAutomorphism(tuple(vm), tuple(lm))

    def is_identity(self) -> bool:
        return all(self.vertex_map[s] == s and self.label_maps[s] == tuple(range(len(self.label_maps[s])))
                   for s in range(len(self.vertex_map)))

    def apply_coordinates(self, s: int, w: Sequence) -> tuple[int, list]:
        """Move chart-``s`` coordinates to the image chart, relabeled."""
        out = [None] * len(w)
        for j, x in enumerate(w):
            out[self.label_maps[s][j]] = x
        return self.vertex_map[s], out

    def to_json(self) -> dict:
        return {"vertex_map": list(self.vertex_map), "label_maps": [list(m) for m in self.label_maps]}


def _extend_isomorphism(E1: ExchangeGraph, E2: ExchangeGraph, c: int,
                        pi: Sequence[int]) -> GraphAutomorphism | None:
    n = E1.rank
    vmap = {E1.base: c}
    lmap = {E1.base: tuple(pi)}
    queue = deque([E1.base])
    while queue:
        s = queue.popleft()
        gs, ls = vmap[s], lmap[s]
        for i in range(n):
            t = E1.target(s, i)
            gi = ls[i]
            t2 = E2.target(gs, gi)
            r1, r2 = E1.rhos[s, i], E2.rhos[gs, gi]
            lt = [0] * n
            for j in range(n):
                lt[r1[j]] = int(r2[ls[j]])
            lt = tuple(lt)
            if t in vmap:
                if vmap[t] != t2 or lmap[t] != lt:
                    return None
            else:
                vmap[t] = t2
                lmap[t] = lt
                queue.append(t)
    if len(set(vmap.values())) != len(E1) or len(E1) != len(E2):
        return None
    for s in E1.vertices:
        B1, B2, ls = E1.seeds[s].B, E2.seeds[vmap[s]].B, lmap[s]
        if any(B2[ls[j], ls[k]] != B1[j, k] for j in range(n) for k in range(n)):
            return None
    return GraphAutomorphism(tuple(vmap[s] for s in E1.vertices), tuple(lmap[s] for s in E1.vertices))


def isomorphisms(E1: ExchangeGraph, E2: ExchangeGraph) -> list[GraphAutomorphism]:
    """All isomorphisms of exchange graphs preserving ``v`` and ``ρ``.

    An isomorphism is pinned down by where it sends the base vertex and its
    labels, so candidates are enumerated over those and propagated.
    """
    if E1.rank != E2.rank or len(E1) != len(E2):
        return []
    n = E1.rank
    B0 = E1.seeds[E1.base].B
    found = []
    for c in E2.vertices:
        Bc = E2.seeds[c].B
        for pi in itertools.permutations(range(n)):
            if all(Bc[pi[j], pi[k]] == B0[j, k] for j in range(n) for k in range(n)):
                g = _extend_isomorphism(E1, E2, c, pi)
                if g is not None:
                    found.append(g)
    return found


def modular_group(E: ExchangeGraph) -> list[GraphAutomorphism]:
    """All automorphisms of ``E``; the identity comes first."""
    group = isomorphisms(E, E)
    group.sort(key=lambda g: (not g.is_identity(), g.vertex_map, g.label_maps))
    return group


def find_dt_element(E: ExchangeGraph, group: list[GraphAutomorphism] | None = None
                    ) -> GraphAutomorphism | None:
    """The automorphism sending every positive orthant to the negative one.

    Returns ``None`` when no element qualifies.  A found element is checked
    to be central.
    """
    group = modular_group(E) if group is None else group
    n = E.rank
    for g in group:
        if _is_dt(E, g, n):
            if not all(g.compose(h) == h.compose(g) for h in group):
                raise RuntimeError("DT candidate is not central")
            return g
    return None


def _is_dt(E: ExchangeGraph, g: GraphAutomorphism, n: int) -> bool:
    for s in E.vertices:
        Ts = g(s)
        inv = [0] * n
        for j, k in enumerate(g.labels(s)):
            inv[k] = j
        for k in range(n):
            e = [0] * n
            e[k] = 1
            img = E.transport(Ts, s, e, tropical_edge_map)
            want = [0] * n
            want[inv[k]] = -1
            if img != want:
                return False
    return True
