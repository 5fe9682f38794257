import os
import sys

import pytest

REPO_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, os.path.join(REPO_ROOT, 'src'))
sys.path.insert(0, REPO_ROOT)

from core.error_handler import reset_global_error_handler  # noqa: E402
from core.settings import Settings, set_settings  # noqa: E402
from objects.network import load_network, parse_network  # noqa: E402
from objects.parameter_graph import build_parameter_graph  # noqa: E402
from objects.timeseries import PatternDiagram  # noqa: E402

DATA = os.path.join(REPO_ROOT, 'data')
TOGGLE_NET = os.path.join(DATA, 'networks', 'toggle.net')
THREE_NODE_NET = os.path.join(DATA, 'networks', 'three_node.net')
WAVEPOOL_NET = os.path.join(DATA, 'networks', 'mini_wavepool.net')
XY_LEFT = os.path.join(DATA, 'patterns', 'xy_left.yaml')
XY_RIGHT = os.path.join(DATA, 'patterns', 'xy_right.yaml')

# 1 input, 3 outputs: the shape of Clb2 in the mini wavepool
FAN_OUT_TEXT = """
C : (A)
A : (C)
B : (C)
D : (C)
"""


@pytest.fixture(autouse=True)
def default_settings():
    """Every test starts from the documented defaults, whatever the environment says."""
    set_settings(Settings())
    reset_global_error_handler()
    yield
    set_settings(Settings())


@pytest.fixture
def toggle():
    return load_network(TOGGLE_NET)


@pytest.fixture
def toggle_pg(toggle):
    return build_parameter_graph(toggle)


@pytest.fixture
def three_node():
    return load_network(THREE_NODE_NET)


@pytest.fixture
def three_node_pg(three_node):
    return build_parameter_graph(three_node)


@pytest.fixture
def fan_out():
    return parse_network(FAN_OUT_TEXT)


@pytest.fixture
def xy_left():
    return PatternDiagram.load(XY_LEFT)


@pytest.fixture
def xy_right():
    return PatternDiagram.load(XY_RIGHT)


def three_node_parameter(pg, x_band, y_band, y_perm, z_band):
    """Parameter index of the 3-node network from per-node band maps (Y also needs its order)."""
    digits = (pg.factors[0].find(x_band), pg.factors[1].find(y_band, y_perm), pg.factors[2].find(z_band))
    return pg.tuple_to_index(digits)


@pytest.fixture
def fc_param(three_node_pg):
    """Parameter with one stable full cycle."""
    return three_node_parameter(three_node_pg, (0, 0, 1, 1), (1, 2), (0, 1), (0, 1))


@pytest.fixture
def pc_param(three_node_pg):
    """Parameter with a stable XY cycle at z=0 fed by an unstable one at z=1."""
    return three_node_parameter(three_node_pg, (0, 1, 0, 1), (0, 2), (1, 0), (0, 0))


@pytest.fixture
def fp_param(three_node_pg):
    """Parameter with a stable fixed point at 100 fed by an unstable XY cycle."""
    return three_node_parameter(three_node_pg, (0, 1, 1, 1), (0, 2), (1, 0), (0, 0))


@pytest.fixture(scope='session')
def wavepool_pg():
    """The mini wavepool parameter graph; building it is what makes the wavepool tests slow."""
    return build_parameter_graph(load_network(WAVEPOOL_NET))
