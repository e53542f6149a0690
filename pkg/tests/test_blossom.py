"""Oracle tests for the exact matching kernel.

The solver is checked three independent ways: exhaustive enumeration of all
pairings (small n), networkx's pure-python blossom (medium n), and structural
properties (determinism, perfectness).
"""

import itertools

import numpy as np
import pytest

from phocs._blossom import min_weight_perfect_matching


def brute_force_min_pairing(dist):
    """Enumerate every perfect pairing; return (best pairs, best total)."""
    n = dist.shape[0]
    best = None
    best_total = None

    def rec(remaining, acc, total):
        nonlocal best, best_total
        if not remaining:
            if best_total is None or total < best_total:
                best_total = total
                best = list(acc)
            return
        a = remaining[0]
        rest = remaining[1:]
        for idx, b in enumerate(rest):
            rec(rest[:idx] + rest[idx + 1:], acc + [(a, b)],
                total + dist[a, b])

    rec(list(range(n)), [], 0)
    return best, best_total


def check_perfect(mate):
    n = len(mate)
    assert sorted(mate) == sorted(range(n))
    for i in range(n):
        assert mate[mate[i]] == i
        assert mate[i] != i


def matching_total(dist, mate):
    return sum(int(dist[i, mate[i]]) for i in range(len(mate)) if mate[i] > i)


def random_symmetric(rng, n, wmax):
    d = rng.integers(0, wmax + 1, size=(n, n))
    d = np.triu(d, 1)
    return (d + d.T).astype(np.int64)


def test_empty_and_pair():
    mate, total = min_weight_perfect_matching(np.zeros((0, 0), dtype=int))
    assert len(mate) == 0 and total == 0
    mate, total = min_weight_perfect_matching(np.array([[0, 7], [7, 0]]))
    assert list(mate) == [1, 0]
    assert total == 7


def test_odd_count_rejected():
    with pytest.raises(ValueError):
        min_weight_perfect_matching(np.zeros((3, 3), dtype=int))


def test_asymmetric_rejected():
    d = np.array([[0, 1], [2, 0]])
    with pytest.raises(ValueError):
        min_weight_perfect_matching(d)


def test_negative_rejected():
    d = np.array([[0, -1], [-1, 0]])
    with pytest.raises(ValueError):
        min_weight_perfect_matching(d)


@pytest.mark.parametrize("n", [2, 4, 6, 8, 10])
def test_against_brute_force_random(n):
    rng = np.random.default_rng(1000 + n)
    for _ in range(60):
        d = random_symmetric(rng, n, 30)
        mate, total = min_weight_perfect_matching(d)
        check_perfect(mate)
        assert matching_total(d, mate) == total
        _, best_total = brute_force_min_pairing(d)
        assert total == best_total


def test_against_brute_force_ties():
    # many equal weights force heavy blossom activity
    rng = np.random.default_rng(77)
    for _ in range(60):
        d = random_symmetric(rng, 8, 3)
        mate, total = min_weight_perfect_matching(d)
        check_perfect(mate)
        _, best_total = brute_force_min_pairing(d)
        assert total == best_total


def test_zero_weights_allowed():
    rng = np.random.default_rng(5)
    for _ in range(40):
        d = random_symmetric(rng, 6, 2)  # lots of zeros
        mate, total = min_weight_perfect_matching(d)
        check_perfect(mate)
        _, best_total = brute_force_min_pairing(d)
        assert total == best_total


def test_against_networkx_medium():
    nx = pytest.importorskip("networkx")
    rng = np.random.default_rng(42)
    for n in (12, 20, 30):
        for _ in range(8):
            d = random_symmetric(rng, n, 100)
            mate, total = min_weight_perfect_matching(d)
            check_perfect(mate)
            g = nx.Graph()
            for i in range(n):
                for j in range(i + 1, n):
                    g.add_edge(i, j, weight=int(d[i, j]))
            nx_pairs = nx.min_weight_matching(g)
            nx_total = sum(int(d[i, j]) for i, j in nx_pairs)
            assert total == nx_total


def test_torus_metric_instances():
    # defect-like point clouds with wraparound manhattan metric
    nx = pytest.importorskip("networkx")
    rng = np.random.default_rng(9)
    L = 9
    for _ in range(6):
        n = 24
        pts = rng.integers(0, L, size=(n, 3))
        delta = np.abs(pts[:, None, :] - pts[None, :, :])
        d = np.minimum(delta, L - delta).sum(axis=2).astype(np.int64)
        mate, total = min_weight_perfect_matching(d)
        check_perfect(mate)
        g = nx.Graph()
        for i in range(n):
            for j in range(i + 1, n):
                g.add_edge(i, j, weight=int(d[i, j]))
        nx_total = sum(int(d[i, j]) for i, j in nx.min_weight_matching(g))
        assert total == nx_total


def test_deterministic():
    rng = np.random.default_rng(3)
    d = random_symmetric(rng, 40, 50)
    mate1, t1 = min_weight_perfect_matching(d)
    mate2, t2 = min_weight_perfect_matching(d.copy())
    assert t1 == t2
    assert np.array_equal(mate1, mate2)
