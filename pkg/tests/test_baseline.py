import numpy as np
import pytest

from conftest import two_layer
from geoseg.baseline import (W_MIN, build_graph, chiu_edge_weight, dijkstra_boundary, path_cost,
                             shortest_path, vertical_gradient_map)
from geoseg.weights import Polarity


def bellman_ford(n, edges, source):
    dist = [float("inf")] * n
    dist[source] = 0.0
    for _ in range(n - 1):
        changed = False
        for u, v, w in edges:
            if dist[u] + w < dist[v]:
                dist[v] = dist[u] + w
                changed = True
            if dist[v] + w < dist[u]:
                dist[u] = dist[v] + w
                changed = True
        if not changed:
            break
    return dist


def test_edge_weight_examples():
    assert chiu_edge_weight(1, 1, W_MIN) == W_MIN
    assert chiu_edge_weight(0, 0, W_MIN) == 2 + W_MIN
    assert chiu_edge_weight(0.25, 0.5, 0.1) == pytest.approx(1.35, abs=1e-15)


def test_graph_structure():
    g = build_graph(np.full((3, 4), 0.5))
    rows, cols = g.shape
    assert (rows, cols) == (3, 6)
    horizontal = rows * (cols - 1)
    vertical = (rows - 1) * cols
    diagonal = 2 * (rows - 1) * (cols - 1)
    assert g.n_edges == horizontal + vertical + diagonal
    assert tuple(g.coords([g.source, g.target])[0]) == (1, 0)
    assert tuple(g.coords([g.target])[0]) == (1, 5)


@pytest.mark.parametrize("gval", [0.0, 0.3, 1.0])
def test_uniform_closed_form(gval):
    n = 9
    img_g = np.full((7, n), gval)
    path = shortest_path(build_graph(img_g))
    assert path.cost == pytest.approx((n + 1) * (2 - 2 * gval + W_MIN), rel=1e-12)
    assert path_cost(path.graph, path.nodes) == pytest.approx(path.cost, rel=1e-12)


def test_uniform_boundary_is_horizontal():
    rows, cols = 11, 15
    img = np.tile(np.linspace(0, 1, rows)[:, None], (1, cols))
    curve = dijkstra_boundary(img, Polarity.DARK_TO_BRIGHT)
    assert curve.width == cols
    assert np.ptp(curve.depths) == 0


def test_matches_bellman_ford(rng):
    for _ in range(100):
        g = rng.uniform(0, 1, (8, 8))
        graph = build_graph(g, W_MIN)
        u, v, w = graph.edges()
        ref = bellman_ford(graph.shape[0] * graph.shape[1], list(zip(u, v, w)), graph.source)
        assert shortest_path(graph).cost == ref[graph.target]


def test_two_layer():
    img = two_layer(20, 16, 10, 0.1, 0.9)
    curve = dijkstra_boundary(img, Polarity.DARK_TO_BRIGHT)
    assert np.all(np.abs(curve.depths - 9.5) <= 1.0)
    curve = dijkstra_boundary(1.0 - img, Polarity.BRIGHT_TO_DARK)
    assert np.all(np.abs(curve.depths - 9.5) <= 1.0)


def test_mask_restricts_path():
    img = two_layer(30, 12, 10, 0.1, 0.9)
    img[20:] = 0.2  # a second, bright-to-dark step
    img[25:] = 1.0  # and a third, dark-to-bright, stronger than the first
    mask = np.zeros(img.shape, bool)
    mask[5:15] = True
    curve = dijkstra_boundary(img, Polarity.DARK_TO_BRIGHT, mask=mask)
    assert np.all((curve.depths >= 5) & (curve.depths <= 14))


def test_gradient_map_range(rng):
    g = vertical_gradient_map(rng.uniform(0, 1, (9, 9)), Polarity.BRIGHT_TO_DARK)
    assert g.min() == 0 and g.max() == 1


def test_rejects_unnormalised():
    with pytest.raises(ValueError):
        build_graph(np.full((3, 3), 1.5))


def test_path_cost_rejects_gaps():
    graph = build_graph(np.full((3, 3), 0.5))
    with pytest.raises(ValueError):
        path_cost(graph, [0, 2])
