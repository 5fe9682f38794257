import json

import pytest

from core.error_handler import ErrorHandler, handle_errors, safe_execute
from core.exceptions import (ConfigurationError, ConsistencyError, FileSystemError, GrnDynamicsError,
                             ManifestVersionError, PatternError, YAMLParsingError, get_exception_class)
from core.manifest import FORMAT_VERSION, RunManifest, build_fingerprint
from core.records import (data_hash, file_hash, iter_jsonl, load_yaml, read_jsonl, save_yaml, text_hash,
                          write_jsonl)
from core.settings import Settings, get_settings, set_settings
from core.validation import validate_pattern_document, validate_phenotype_spec


class TestSettings:
    def test_defaults(self):
        settings = Settings()
        assert settings.max_in_edges == 4
        assert settings.epsilon == 0.10
        assert settings.hill_exponent == 10.0
        assert settings.workers == 1

    def test_from_env(self, monkeypatch):
        monkeypatch.setenv('GRN_EPSILON', '0.2')
        monkeypatch.setenv('GRN_WORKERS', '4')
        settings = Settings.from_env()
        assert settings.epsilon == 0.2
        assert settings.workers == 4

    @pytest.mark.parametrize("key, value", [
        ('GRN_EPSILON', '0.5'),
        ('GRN_EPSILON', 'lots'),
        ('GRN_WORKERS', '0'),
        ('GRN_TRANSIENT', '1.0'),
        ('GRN_LP_MARGIN', '-1'),
    ])
    def test_invalid_env(self, monkeypatch, key, value):
        monkeypatch.setenv(key, value)
        with pytest.raises(ConfigurationError):
            Settings.from_env()

    def test_override_skips_none(self):
        settings = Settings().override(workers=3, hill_exponent=None)
        assert settings.workers == 3
        assert settings.hill_exponent == 10.0

    def test_process_settings(self):
        set_settings(Settings(epsilon=0.2))
        assert get_settings().epsilon == 0.2


class TestErrorHandler:
    def test_counts_by_code(self):
        handler = ErrorHandler()
        handler.handle_error(ConsistencyError("black wall", {'domain': '01'}))
        handler.handle_error(PatternError("unknown gene", variables=['Q']))
        handler.handle_error(ConsistencyError("black wall again"))
        assert handler.error_counts == {'CONSISTENCY_ERROR': 2, 'PATTERN_ERROR': 1}
        summary = handler.get_error_summary()
        assert summary['total_errors'] == 3
        assert len(summary['critical_errors']) == 2

    def test_foreign_errors_are_classified(self):
        handler = ErrorHandler()
        assert handler.handle_error(FileNotFoundError('x')).error_code == 'FILESYSTEM_ERROR'
        assert handler.handle_error(KeyError('x')).error_code == 'PARAMETER_INDEX_ERROR'
        assert handler.handle_error(RuntimeError('x')).error_code == 'UNKNOWN_ERROR'

    def test_context_is_merged(self):
        report = ErrorHandler().handle_error(ConsistencyError("bad", {'parameter': 3}), {'phenotype': 'wt'})
        assert report.context == {'parameter': 3, 'phenotype': 'wt'}

    def test_export(self, tmp_path):
        handler = ErrorHandler()
        handler.handle_error(ConsistencyError("bad"))
        path = tmp_path / 'errors.json'
        handler.export_error_report(str(path))
        document = json.loads(path.read_text())
        assert document['summary']['error_counts'] == {'CONSISTENCY_ERROR': 1}
        handler.clear_errors()
        assert handler.get_error_summary()['total_errors'] == 0

    def test_decorator_wraps_foreign_errors(self):
        handler = ErrorHandler()

        @handle_errors(handler)
        def lookup(table, key):
            return table[key]

        assert lookup({'a': 1}, 'a') == 1
        with pytest.raises(GrnDynamicsError) as info:
            lookup({}, 'b')
        assert info.value.error_code == 'PARAMETER_INDEX_ERROR'
        assert isinstance(info.value.cause, KeyError)
        assert handler.error_counts == {'PARAMETER_INDEX_ERROR': 1}

    def test_decorator_keeps_domain_errors(self):
        handler = ErrorHandler()

        @handle_errors(handler)
        def broken():
            raise PatternError("unknown gene")

        with pytest.raises(PatternError):
            broken()
        assert handler.error_counts == {}

    def test_failed_parameters(self):
        handler = ErrorHandler()
        handler.handle_error(ConsistencyError("black wall", {'parameter': 7}))
        handler.handle_error(ConsistencyError("black wall", {'parameter': 3}))
        handler.handle_error(PatternError("unknown gene"))
        assert handler.failed_parameters() == [3, 7]
        assert handler.get_error_summary()['failed_parameters'] == [3, 7]

    def test_safe_execute(self):
        handler = ErrorHandler()
        assert safe_execute(int, 'x', default=-1, error_handler=handler) == -1
        assert safe_execute(int, '7', default=-1) == 7
        assert handler.error_counts == {'VALIDATION_ERROR': 1}

    def test_exception_lookup(self):
        assert get_exception_class('PATTERN_ERROR') is PatternError
        assert ConsistencyError("x").to_dict()['error_code'] == 'CONSISTENCY_ERROR'


class TestValidation:
    def test_valid_specs(self):
        assert validate_phenotype_spec({'name': 'sac', 'kind': 'CHECKPOINT_FP', 'preset': 'SAC'}) == []
        assert validate_phenotype_spec({'name': 'cp', 'kind': 'CHECKPOINT_FP',
                                        'fixed_points': [[0, 0, 2, 1, 'not_low']]}) == []

    def test_unknown_field(self):
        assert validate_phenotype_spec({'name': 'x', 'kind': 'CHECKPOINT_FP', 'preset': 'SAC', 'colour': 'red'})

    def test_node_count(self):
        errors = validate_phenotype_spec({'name': 'cp', 'kind': 'CHECKPOINT_FP', 'fixed_points': [[0, 1]]},
                                         node_count=3)
        assert len(errors) == 1

    def test_mutant_requirements(self):
        errors = validate_phenotype_spec({'name': 'm', 'kind': 'MUTANT_CYCLING', 'pattern': 'p.yaml'})
        assert len(errors) == 2

    def test_pattern_document(self):
        document = {'events': [{'gene': 'X', 'kind': 'min'}, {'gene': 'Q', 'kind': 'max'}]}
        assert validate_pattern_document(document) == []
        assert validate_pattern_document(document, known_genes=['X']) == ["events.1: unknown gene 'Q'"]
        assert validate_pattern_document({'events': [{'gene': 'X'}]})


class TestManifest:
    def test_save_and_load(self, tmp_path):
        manifest = RunManifest(subcommand='sweep', network_fingerprint='abc', range=[0, 10],
                               notes={'eligible': 10})
        path = str(tmp_path / 'manifest.yaml')
        manifest.save(path)
        loaded = RunManifest.load(path)
        assert loaded == manifest
        assert loaded.parameter_count == 10

    def test_format_version(self, tmp_path):
        path = str(tmp_path / 'manifest.yaml')
        document = RunManifest(subcommand='sweep').to_dict()
        document['format_version'] = FORMAT_VERSION + 1
        save_yaml(document, path)
        with pytest.raises(ManifestVersionError):
            RunManifest.load(path)

    def test_not_a_manifest(self, tmp_path):
        path = str(tmp_path / 'manifest.yaml')
        save_yaml({'hello': 'world'}, path)
        with pytest.raises(YAMLParsingError):
            RunManifest.load(path)

    def test_fingerprint(self):
        assert f"record format {FORMAT_VERSION}" in build_fingerprint()


class TestRecords:
    def test_jsonl(self, tmp_path):
        path = str(tmp_path / 'out' / 'records.jsonl')
        assert write_jsonl([{'parameter': 2, 'label': 'FC'}], path) == 1
        write_jsonl([{'parameter': 5}], path, append=True)
        assert read_jsonl(path) == [{'parameter': 2, 'label': 'FC'}, {'parameter': 5}]
        with open(path) as f:
            assert f.readline() == '{"label":"FC","parameter":2}\n'

    def test_malformed_record(self, tmp_path):
        path = tmp_path / 'records.jsonl'
        path.write_text('{"parameter": 1}\nnot json\n')
        with pytest.raises(YAMLParsingError):
            list(iter_jsonl(str(path)))

    def test_missing_files(self, tmp_path):
        with pytest.raises(FileSystemError):
            load_yaml(str(tmp_path / 'absent.yaml'))
        with pytest.raises(FileSystemError):
            read_jsonl(str(tmp_path / 'absent.jsonl'))

    def test_bad_yaml(self, tmp_path):
        path = tmp_path / 'bad.yaml'
        path.write_text("a: [1, 2\n")
        with pytest.raises(YAMLParsingError):
            load_yaml(str(path))

    def test_hashes(self, tmp_path):
        path = tmp_path / 'x.txt'
        path.write_text('abc')
        assert file_hash(str(path)) == text_hash('abc')
        assert text_hash('abc') == 'ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad'
        assert data_hash({'b': 1, 'a': 2}) == data_hash({'a': 2, 'b': 1})
