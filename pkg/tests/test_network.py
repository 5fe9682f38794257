import pytest

from core.exceptions import NetworkParseError, NetworkValidationError, ParameterIndexError
from objects.network import Sign, load_network, node_state_count, parse_network, serialize

from conftest import WAVEPOOL_NET


class TestParseNetwork:
    def test_three_node_structure(self, three_node):
        assert three_node.names == ('X', 'Y', 'Z')
        assert three_node.inputs(0) == [1, 2]
        assert three_node.is_pure_product(0)
        assert [three_node.names[t] for t in three_node.outputs(1)] == ['X', 'Z']
        z_edge = three_node.edges[three_node.edge_between(2, 0)]
        assert z_edge.sign is Sign.REPRESSING

    def test_state_counts_follow_out_degree(self, three_node):
        assert [node_state_count(three_node, i) for i in range(3)] == [2, 3, 2]

    def test_sum_group(self):
        net = parse_network("A : (B + ~C)\nB : (A)\nC : (A)\n")
        assert net.interaction[0] == ((0, 1),)
        assert net.is_pure_sum(0)
        assert not net.is_pure_product(0)

    def test_comments_and_blank_lines(self):
        net = parse_network("# toggle\n\nX1 : (~X2)   # repressed\nX2 : (~X1)\n")
        assert net.size == 2

    def test_self_regulation(self):
        net = parse_network("A : (A)(~B)\nB : (A)\n")
        assert net.regulates_itself(0)
        assert not net.regulates_itself(1)

    def test_mini_wavepool_degrees(self):
        net = load_network(WAVEPOOL_NET)
        assert net.names == ('S', 'N', 'D', 'W', 'C')
        assert [net.out_degree(i) for i in range(net.size)] == [3, 1, 2, 1, 3]
        assert len(net.edges) == 10
        assert net.in_degree(net.index('C')) == 1

    def test_serialize_is_canonical(self, three_node):
        assert serialize(parse_network(serialize(three_node))) == serialize(three_node)
        assert parse_network(serialize(three_node)) == three_node

    def test_fingerprint_ignores_formatting(self):
        a = parse_network("X1 : (~X2)\nX2 : (~X1)\n")
        b = parse_network("# same\nX1:(~X2)\n\nX2 :  ( ~X1 )\n")
        assert a.fingerprint() == b.fingerprint()


class TestParseErrors:
    @pytest.mark.parametrize("text, line", [
        ("A : (B)\n", 1),
        ("A : (A)\nA : (A)\n", 2),
        ("A : (A)(A)\n", 1),
        ("A : \n", 1),
        ("A : (A\n", 1),
        ("A : ()\n", 1),
        ("A (A)\n", 1),
        ("A : (A)\nB : A\n", 2),
    ])
    def test_line_numbers(self, text, line):
        with pytest.raises(NetworkParseError) as info:
            parse_network(text)
        assert info.value.line_number == line

    def test_empty_description(self):
        with pytest.raises(NetworkParseError):
            parse_network("# nothing here\n")

    def test_unknown_node_lookup(self, toggle):
        with pytest.raises(NetworkValidationError):
            toggle.index('X3')
        with pytest.raises(ParameterIndexError):
            toggle.resolve(5)
