"""Shared fixtures: tiny analytic cases and the bundled IEEE files."""

from pathlib import Path

import numpy as np
import pytest

from slackopt import Network, parse_matpower

DATA_DIR = Path(__file__).resolve().parents[1] / "data"

CASE57 = DATA_DIR / "case57.m"
CASE118 = DATA_DIR / "case118.m"
CASE89 = DATA_DIR / "case89pegase.m"
CASE1354 = DATA_DIR / "case1354pegase.m"

# one generator, one load, one line; lossless solution is dtheta = pi/6
TWO_BUS_TEXT = """\
function mpc = twobus
mpc.version = '2';
mpc.baseMVA = 100;
mpc.bus = [
    1  3   0  0  0  0  1  1.0  0  345  1  1.1  0.9;
    2  1  50  0  0  0  1  1.0  0  345  1  1.1  0.9;
];
mpc.gen = [
    1  50  0  100  -100  1.0  100  1  100  0;
];
mpc.branch = [
    1  2  0  1.0  0  100  100  100  0  0  1  -360  360;
];
"""


@pytest.fixture
def two_bus_case():
    return parse_matpower(TWO_BUS_TEXT, name="twobus")


@pytest.fixture(scope="session")
def case57():
    from slackopt import load_case

    return load_case(CASE57)


@pytest.fixture(scope="session")
def case118():
    from slackopt import load_case

    return load_case(CASE118)


def toy_network(edges, b, g=None, gen_p=None, load_p=None, voltage=None,
                gen_buses=None, ref_bus=None):
    """Build a Network directly from edge lists for solver/metric tests."""
    edges = np.asarray(edges, dtype=int)
    n = int(edges.max()) + 1
    b = np.asarray(b, dtype=float)
    g = np.zeros_like(b) if g is None else np.asarray(g, dtype=float)
    gen_p = np.zeros(n) if gen_p is None else np.asarray(gen_p, dtype=float)
    load_p = np.zeros(n) if load_p is None else np.asarray(load_p, dtype=float)
    voltage = np.ones(n) if voltage is None else np.asarray(voltage, dtype=float)
    if gen_buses is None:
        gen_buses = frozenset(np.nonzero(gen_p > 0)[0].tolist())
    return Network(
        bus_ids=tuple(range(n)),
        edge_i=edges[:, 0],
        edge_j=edges[:, 1],
        b=b,
        g=g,
        voltage=voltage,
        gen_p=gen_p,
        load_p=load_p,
        gen_buses=frozenset(gen_buses),
        ref_bus=ref_bus,
    )


def random_connected_graph(rng, n_max=50):
    """Random tree plus extra edges; returns (n, edge_i, edge_j, weights)."""
    n = int(rng.integers(2, n_max + 1))
    edges = set()
    for k in range(1, n):
        edges.add((int(rng.integers(0, k)), k))
    extra = int(rng.integers(0, 2 * n))
    for _ in range(extra):
        i, j = rng.integers(0, n, size=2)
        if i != j:
            edges.add((min(int(i), int(j)), max(int(i), int(j))))
    edges = sorted(edges)
    ei = np.array([e[0] for e in edges])
    ej = np.array([e[1] for e in edges])
    w = rng.uniform(0.1, 10.0, size=len(edges))
    return n, ei, ej, w
