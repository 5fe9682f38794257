import json
import os

import pytest

import grn
from core.manifest import RunManifest, manifest_path
from core.records import file_hash, load_yaml
from objects.network import load_network
from objects.timeseries import load_csv

from conftest import DATA, THREE_NODE_NET, TOGGLE_NET, XY_LEFT

TOGGLE_FP_SPEC = os.path.join(DATA, 'specs', 'toggle_fp10.yaml')
THREE_NODE_FP_SPEC = os.path.join(DATA, 'specs', 'three_node_fp.yaml')


def run(capsys, *argv):
    code = grn.dispatch(list(argv))
    return code, capsys.readouterr().out


class TestParser:
    def test_version(self, capsys):
        code, out = run(capsys, '--version')
        assert code == 0
        assert 'grn-dynamics' in out

    def test_missing_subcommand(self, capsys):
        assert run(capsys)[0] == 2

    def test_bad_range(self, capsys):
        code, _ = run(capsys, 'sweep', '--net', TOGGLE_NET, '--spec', TOGGLE_FP_SPEC, '--range', '10:5')
        assert code == 2

    def test_bad_filter_key(self, capsys):
        code, _ = run(capsys, 'pg', 'find', '--net', TOGGLE_NET, '--where', 'X1:colour=red')
        assert code == 2

    def test_missing_network(self, capsys, tmp_path):
        code, _ = run(capsys, 'pg', 'size', '--net', str(tmp_path / 'absent.net'))
        assert code == 1


class TestParameterGraphCommands:
    def test_size(self, capsys):
        code, out = run(capsys, 'pg', 'size', '--net', TOGGLE_NET)
        assert code == 0
        assert out.strip() == '9'

    def test_size_porcelain(self, capsys):
        code, out = run(capsys, 'pg', 'size', '--net', THREE_NODE_NET, '--porcelain')
        assert json.loads(out) == {'size': 216, 'radices': [6, 12, 3], 'certified': True}

    def test_find(self, capsys):
        code, out = run(capsys, 'pg', 'find', '--net', TOGGLE_NET, '--where', 'X1:band=0,1', '--where',
                        'X2:band=0,0')
        assert code == 0
        assert out.split() == ['1']

    def test_factor(self, capsys):
        code, out = run(capsys, 'pg', 'factor', '--net', TOGGLE_NET, '--node', 'X1', '--porcelain')
        records = [json.loads(line) for line in out.splitlines()]
        assert [r['factor'] for r in records] == [0, 1, 2]
        assert [r['restriction'] for r in records] == ['OFF', 'WT', 'ON']

    def test_neighbors(self, capsys):
        code, out = run(capsys, 'pg', 'neighbors', '--net', TOGGLE_NET, '--param', '4')
        assert out.split() == ['1', '3', '5', '7']


class TestDynamicsCommands:
    def test_morse_graph_text(self, capsys):
        code, out = run(capsys, 'dyn', 'mg', '--net', TOGGLE_NET, '--param', '1')
        assert code == 0
        assert out.splitlines() == ['0: FP(10) (stable), 1 domains']

    def test_morse_graph_dot(self, capsys):
        code, out = run(capsys, 'dyn', 'mg', '--net', TOGGLE_NET, '--param', '1', '--dot')
        assert code == 0
        assert out.startswith('digraph MorseGraph {')
        assert 'FP(10)' in out

    def test_parameter_out_of_range(self, capsys):
        assert run(capsys, 'dyn', 'stg', '--net', TOGGLE_NET, '--param', '9')[0] == 1


class TestMatchCommand:
    def test_match(self, capsys, three_node_pg, pc_param):
        code, out = run(capsys, 'match', '--net', THREE_NODE_NET, '--param', str(pc_param), '--pattern', XY_LEFT,
                        '--porcelain')
        assert code == 0
        records = [json.loads(line) for line in out.splitlines()]
        assert [(r['label'], r['matched']) for r in records] == [('PC{X,Y}', True)]


class TestSweepPipeline:
    def test_sweep_merge_and_mpg(self, capsys, tmp_path):
        shards = [str(tmp_path / 'a'), str(tmp_path / 'b')]
        assert run(capsys, 'sweep', '--net', THREE_NODE_NET, '--spec', THREE_NODE_FP_SPEC, '--range', '0:100',
                   '--out', shards[0])[0] == 0
        assert run(capsys, 'sweep', '--net', THREE_NODE_NET, '--spec', THREE_NODE_FP_SPEC, '--range', '100:216',
                   '--out', shards[1])[0] == 0

        merged = str(tmp_path / 'merged')
        code, out = run(capsys, 'merge', '--out', merged, *shards, '--porcelain')
        assert code == 0
        assert json.loads(out)['range'] == [0, 216]

        summary = str(tmp_path / 'mpg.yaml')
        code, _ = run(capsys, 'mpg', '--net', THREE_NODE_NET, '--exclude', 'Z', '--out', summary, merged)
        assert code == 0
        document = load_yaml(summary)
        assert document['excluded'] == 'Z'
        assert document['normalizer'] == 'three_node_fp'
        assert document['manifest'] == 'mpg.yaml.manifest.yaml'
        manifest = RunManifest.load(manifest_path(summary))
        assert manifest.subcommand == 'mpg'
        assert manifest.input_hashes[os.path.join(merged, 'manifest.yaml')] == \
            file_hash(os.path.join(merged, 'manifest.yaml'))

    def test_sweep_porcelain(self, capsys):
        code, out = run(capsys, 'sweep', '--net', TOGGLE_NET, '--spec', TOGGLE_FP_SPEC, '--porcelain')
        assert code == 0
        assert [json.loads(line)['parameter'] for line in out.splitlines()] == [1, 2, 4, 5]

    def test_merge_with_gap(self, capsys, tmp_path):
        shards = [str(tmp_path / 'a'), str(tmp_path / 'b')]
        run(capsys, 'sweep', '--net', TOGGLE_NET, '--spec', TOGGLE_FP_SPEC, '--range', '0:4', '--out', shards[0])
        run(capsys, 'sweep', '--net', TOGGLE_NET, '--spec', TOGGLE_FP_SPEC, '--range', '5:9', '--out', shards[1])
        assert run(capsys, 'merge', '--out', str(tmp_path / 'merged'), *shards)[0] == 1


class TestTimeSeriesCommands:
    def test_extension_count(self, capsys):
        code, out = run(capsys, 'ts', 'extensions', '--pattern', XY_LEFT, '--count')
        assert code == 0
        assert out.strip() == '2'

    def test_discretize(self, capsys, tmp_path):
        path = tmp_path / 'series.csv'
        path.write_text("time,X,Y\n0,0,4\n1,1,3\n2,2,2\n3,3,1\n4,4,0\n5,3,1\n6,2,2\n7,1,3\n8,0,4\n")
        out_path = str(tmp_path / 'pattern.yaml')
        code, _ = run(capsys, 'ts', 'discretize', '--csv', str(path), '--eps', '0.1', '--out', out_path)
        assert code == 0
        keys = sorted(event['gene'] + '_' + event['kind'] for event in load_yaml(out_path)['events'])
        assert keys == ['X_max', 'X_min', 'X_min', 'Y_max', 'Y_max', 'Y_min']


class TestSimCommand:
    def test_sim(self, capsys, tmp_path):
        csv = str(tmp_path / 'run.csv')
        code, out = run(capsys, 'sim', '--net', TOGGLE_NET, '--param', '1', '--t-end', '30', '--csv', csv,
                        '--porcelain')
        assert code == 0
        assert json.loads(out)['domain'] == [1, 0]
        assert os.path.exists(csv)

    @pytest.mark.parametrize("x0", ['0,1', 'a,b'])
    def test_bad_initial_state(self, capsys, x0):
        code, _ = run(capsys, 'sim', '--net', TOGGLE_NET, '--param', '1', '--x0', x0, '--t-end', '1')
        assert code in (1, 2)


class TestOutputManifests:
    def check_manifest(self, output, subcommand, inputs):
        manifest = RunManifest.load(manifest_path(output))
        assert manifest.subcommand == subcommand
        assert manifest.complete
        assert manifest.notes['output'] == os.path.basename(output)
        for path in inputs:
            assert manifest.input_hashes[path] == file_hash(path)
        return manifest, os.path.basename(manifest_path(output))

    @pytest.mark.parametrize("action", ['stg', 'mg'])
    def test_dot_files(self, capsys, tmp_path, action):
        out = str(tmp_path / f'{action}.dot')
        assert run(capsys, 'dyn', action, '--net', TOGGLE_NET, '--param', '1', '--dot', '--out', out)[0] == 0
        manifest, name = self.check_manifest(out, f'dyn {action}', [TOGGLE_NET])
        assert manifest.network_fingerprint == load_network(TOGGLE_NET).fingerprint()
        assert manifest.notes['parameter'] == 1
        with open(out) as f:
            assert f.readline() == f'// manifest: {name}\n'

    def test_pattern_files(self, capsys, tmp_path):
        path = tmp_path / 'series.csv'
        path.write_text("time,X,Y\n0,0,4\n1,1,3\n2,2,2\n3,3,1\n4,4,0\n5,3,1\n6,2,2\n7,1,3\n8,0,4\n")
        out, dot = str(tmp_path / 'pattern.yaml'), str(tmp_path / 'pattern.dot')
        code, _ = run(capsys, 'ts', 'discretize', '--csv', str(path), '--eps', '0.1', '--out', out,
                      '--dot', '--dot-out', dot)
        assert code == 0
        manifest, name = self.check_manifest(out, 'ts discretize', [str(path)])
        assert manifest.notes['epsilon'] == 0.1
        assert load_yaml(out)['metadata']['manifest'] == name
        _, dot_name = self.check_manifest(dot, 'ts discretize', [str(path)])
        with open(dot) as f:
            assert f.readline() == f'// manifest: {dot_name}\n'

    def test_simulation_files(self, capsys, tmp_path):
        csv, witness = str(tmp_path / 'run.csv'), str(tmp_path / 'witness.yaml')
        code, _ = run(capsys, 'sim', '--net', TOGGLE_NET, '--param', '1', '--seed', '2', '--t-end', '5',
                      '--csv', csv, '--save-witness', witness)
        assert code == 0
        manifest, name = self.check_manifest(csv, 'sim', [TOGGLE_NET])
        assert manifest.seed == 2
        assert manifest.notes['parameter'] == 1
        with open(csv) as f:
            assert f.readline() == f'# manifest: {name}\n'
            assert f.readline().startswith('time,X1,X2')
        assert load_csv(csv).genes == ['X1', 'X2']

        _, witness_name = self.check_manifest(witness, 'sim', [TOGGLE_NET])
        assert load_yaml(witness)['manifest'] == witness_name

    def test_stdout_has_no_manifest(self, capsys, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        code, out = run(capsys, 'dyn', 'mg', '--net', TOGGLE_NET, '--param', '1', '--dot')
        assert code == 0
        assert out.startswith('digraph')
        assert os.listdir(tmp_path) == []
