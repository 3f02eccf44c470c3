"""Graph-search boundary detection on an 8-connected pixel graph (comparison method)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra

from .grid import as_grid, gradient_x, linear_stretch
from .trace import BoundaryCurve, GeodesicPath, path_to_boundary
from .weights import Polarity, check_region, strip_padding

W_MIN = 1e-5
# undirected neighbour offsets; the other four follow by symmetry
_OFFSETS = ((0, 1), (1, 0), (1, 1), (1, -1))


def chiu_edge_weight(ga, gb, w_min: float = W_MIN):
    """``2 - (ga + gb) + w_min`` for two 8-adjacent pixels with normalised gradients."""
    return 2.0 - (ga + gb) + w_min


def vertical_gradient_map(img, polarity: Polarity, region=None) -> np.ndarray:
    """Normalised vertical gradient, high where the polarity's transition is."""
    g = gradient_x(as_grid(img))
    return linear_stretch(g if polarity is Polarity.DARK_TO_BRIGHT else -g, region)


@dataclass
class PixelGraph:
    matrix: object  # scipy sparse, upper triangle of the undirected graph
    shape: tuple  # (rows, cols) of the node grid
    source: int
    target: int

    @property
    def n_edges(self) -> int:
        return int(self.matrix.nnz)

    def node(self, r, c) -> int:
        return int(r) * self.shape[1] + int(c)

    def coords(self, nodes) -> np.ndarray:
        nodes = np.asarray(nodes)
        return np.stack([nodes // self.shape[1], nodes % self.shape[1]], axis=1)

    def edges(self):
        """``(u, v, w)`` arrays, each undirected edge listed once."""
        m = self.matrix.tocoo()
        return m.row, m.col, m.data


def build_graph(g, w_min: float = W_MIN, mask=None) -> PixelGraph:
    """Pixel graph over ``g`` with one padded column on each side.

    Padded columns repeat the neighbouring gradient column; edges running
    inside a padded column cost ``w_min`` so the path can slide freely to
    wherever the boundary meets the image edge. Pixels outside ``mask`` keep
    their nodes but take gradient 0 (the most expensive weight).
    """
    g = as_grid(g)
    if np.any(g < 0) or np.any(g > 1):
        raise ValueError("normalised gradients must lie in [0, 1]")
    if mask is not None:
        g = np.where(check_region(mask, g.shape), g, 0.0)
    gp = np.pad(g, ((0, 0), (1, 1)), mode="edge")
    rows, cols = gp.shape
    idx = np.arange(rows * cols).reshape(rows, cols)
    us, vs, ws = [], [], []
    for dr, dc in _OFFSETS:
        r0, r1 = 0, rows - dr
        c0, c1 = max(0, -dc), cols - max(0, dc)
        a = idx[r0:r1, c0:c1]
        b = idx[r0 + dr:r1 + dr, c0 + dc:c1 + dc]
        w = chiu_edge_weight(gp[r0:r1, c0:c1], gp[r0 + dr:r1 + dr, c0 + dc:c1 + dc], w_min)
        if dc == 0:
            w = w.copy()
            w[:, 0] = w_min
            w[:, -1] = w_min
        us.append(a.ravel())
        vs.append(b.ravel())
        ws.append(w.ravel())
    u = np.concatenate(us)
    v = np.concatenate(vs)
    w = np.concatenate(ws)
    assert np.all(w > 0)
    mat = coo_matrix((w, (u, v)), shape=(rows * cols, rows * cols)).tocsr()
    mid = rows // 2
    return PixelGraph(mat, (rows, cols), int(idx[mid, 0]), int(idx[mid, cols - 1]))


@dataclass
class GraphPath:
    nodes: np.ndarray
    cost: float
    graph: PixelGraph

    @property
    def points(self) -> np.ndarray:
        return self.graph.coords(self.nodes).astype(np.float64)


def _walk(pred, source, target):
    nodes = [target]
    while nodes[-1] != source:
        nodes.append(int(pred[nodes[-1]]))
    return np.array(nodes[::-1])


def shortest_path(graph: PixelGraph, tie_break: bool = True) -> GraphPath:
    """Dijkstra from the left padded seed to the right one.

    Equal-cost paths are common on flat gradient maps; with ``tie_break`` the
    geometrically shortest of them (unit straight, sqrt(2) diagonal steps) is
    returned, so such maps give straight boundaries.
    """
    m = graph.matrix
    dist, pred = dijkstra(m, directed=False, indices=graph.source, return_predecessors=True)
    total = dist[graph.target]
    if not np.isfinite(total):
        raise RuntimeError("pixel graph is disconnected")
    if not tie_break:
        return GraphPath(_walk(pred, graph.source, graph.target), float(total), graph)
    back = dijkstra(m, directed=False, indices=graph.target)
    u, v, w = graph.edges()
    slack = 1e-9 * max(total, 1.0)
    tight = (np.minimum(dist[u] + w + back[v], dist[v] + w + back[u]) <= total + slack)
    (ru, cu), (rv, cv) = graph.coords(u[tight]).T, graph.coords(v[tight]).T
    length = np.hypot(ru - rv, cu - cv)
    sub = coo_matrix((length, (u[tight], v[tight])), shape=m.shape).tocsr()
    _, pred = dijkstra(sub, directed=False, indices=graph.source, return_predecessors=True)
    return GraphPath(_walk(pred, graph.source, graph.target), float(total), graph)


def path_cost(graph: PixelGraph, nodes) -> float:
    """Sum of edge weights along consecutive ``nodes``."""
    m = graph.matrix
    total = 0.0
    for a, b in zip(nodes[:-1], nodes[1:]):
        lo, hi = (a, b) if a < b else (b, a)
        w = m[lo, hi]
        if w == 0:
            raise ValueError(f"nodes {a} and {b} are not adjacent")
        total += w
    return float(total)


def dijkstra_boundary(img, polarity: Polarity, w_min: float = W_MIN, mask=None,
                      id: str = "B?", return_path: bool = False):
    """Detect one boundary as the minimum-weight left-to-right graph path."""
    img = as_grid(img)
    g = vertical_gradient_map(img, polarity, mask)
    graph = build_graph(g, w_min, mask)
    path = shortest_path(graph)
    geo = GeodesicPath(path.points, True, len(path.nodes) - 1)
    curve = strip_padding(path_to_boundary(geo, graph.shape[1], id, padded=True))
    return (curve, path) if return_path else curve
