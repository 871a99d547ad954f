"""Experiment config: strict parsing, round trips, derived conventions."""

from __future__ import annotations

import json

import pytest

from exprep import (
    ConfigError,
    ExperimentConfig,
    GridSpec,
    InterpreterSpec,
    ProtocolSpec,
    cache_file,
)


def minimal_record(**overrides) -> dict:
    record = {
        "version": 1,
        "dataset": {"path": "data/spouse", "format": "jsonl"},
        "u_interpreter": {"kind": "hash", "dim": 16, "seed": 0},
        "cache_dir": "cache",
        "out_dir": "out",
        "seeds": [0, 1],
        "protocol": {"kind": "ci_runs"},
    }
    record.update(overrides)
    return record


def full_record() -> dict:
    record = minimal_record(seeds=[0, 1, 2, 3, 4], protocol={"kind": "tacred_median"})
    record["explanations"] = "data/spouse/explanations.jsonl"
    record["v_interpreter"] = {"kind": "hash", "dim": 8, "seed": 3}
    record["extras"] = [
        {
            "source_id": "chems",
            "interpreter": {
                "kind": "ontology",
                "dim": 6,
                "dictionary_paths": [f"dict/{i}.tsv" for i in range(6)],
            },
        }
    ]
    record["fractions"] = [0.1, 0.5, 1.0]
    record["grid"] = {"full": True, "learning_rate": 0.001, "max_epochs": 50,
                      "patience": 5}
    record["ablation"] = {"mode": "random_only", "k_random": 10, "random_seed": 4}
    record["workers"] = 3
    return record


class TestLoading:
    def test_minimal_record_parses_with_defaults(self):
        cfg = ExperimentConfig.from_json_dict(minimal_record())
        assert cfg.explanations_path is None
        assert cfg.v_interpreter is None
        assert cfg.extras == ()
        assert cfg.fractions == ()
        assert cfg.workers == 1
        assert cfg.ablation is None
        assert cfg.grid == GridSpec()

    def test_full_record_parses(self):
        cfg = ExperimentConfig.from_json_dict(full_record())
        assert cfg.u_interpreter.dim == 16
        assert cfg.v_interpreter.dim == 8
        assert cfg.extras[0][0] == "chems"
        assert cfg.extras[0][1].kind == "ontology"
        assert cfg.ablation.k_random == 10
        assert cfg.grid.full is True

    def test_invalid_json_text(self):
        with pytest.raises(ConfigError, match="JSON"):
            ExperimentConfig.loads("{not json")

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="cannot read"):
            ExperimentConfig.load(tmp_path / "nope.json")


class TestRoundTrip:
    def test_loads_of_dumps_is_identity(self):
        cfg = ExperimentConfig.from_json_dict(full_record())
        assert ExperimentConfig.loads(cfg.dumps()) == cfg

    def test_minimal_round_trip(self):
        cfg = ExperimentConfig.from_json_dict(minimal_record())
        assert ExperimentConfig.loads(cfg.dumps()) == cfg

    def test_file_round_trip(self, tmp_path):
        cfg = ExperimentConfig.from_json_dict(full_record())
        path = tmp_path / "config.json"
        cfg.save(path)
        assert ExperimentConfig.load(path) == cfg

    def test_dumps_is_byte_stable(self):
        a = ExperimentConfig.from_json_dict(full_record())
        b = ExperimentConfig.from_json_dict(full_record())
        assert a.dumps() == b.dumps()

    def test_dumps_is_canonical_full_form(self):
        record = json.loads(ExperimentConfig.from_json_dict(minimal_record()).dumps())
        # Every optional section appears explicitly in the serialized form.
        assert set(record) == {
            "version", "dataset", "explanations", "u_interpreter", "v_interpreter",
            "extras", "cache_dir", "out_dir", "seeds", "fractions", "grid",
            "protocol", "ablation", "workers",
        }


class TestUnknownKeys:
    @pytest.mark.parametrize(
        "mutate, where",
        [
            (lambda r: r.update(extra=1), "config"),
            (lambda r: r["dataset"].update(shuffle=True), "config.dataset"),
            (lambda r: r["u_interpreter"].update(temperature=1.0), "config.u_interpreter"),
            (lambda r: r["protocol"].update(runs=5), "config.protocol"),
            (lambda r: r["grid"].update(widths=[1]), "config.grid"),
            (lambda r: r["extras"][0].update(weight=2), "config.extras"),
            (lambda r: r["extras"][0]["interpreter"].update(x=1), "config.extras"),
            (lambda r: r["ablation"].update(shuffle=True), "config.ablation"),
        ],
    )
    def test_unknown_key_rejected_at_each_level(self, mutate, where):
        record = full_record()
        mutate(record)
        with pytest.raises(ConfigError, match=where):
            ExperimentConfig.from_json_dict(record)

    @pytest.mark.parametrize("key", ["version", "dataset", "u_interpreter",
                                     "cache_dir", "out_dir", "seeds", "protocol"])
    def test_missing_required_key_rejected(self, key):
        record = minimal_record()
        del record[key]
        with pytest.raises(ConfigError, match="missing"):
            ExperimentConfig.from_json_dict(record)


class TestValidation:
    def test_unsupported_version(self):
        with pytest.raises(ConfigError, match="version"):
            ExperimentConfig.from_json_dict(minimal_record(version=2))

    def test_unknown_dataset_format(self):
        record = minimal_record()
        record["dataset"]["format"] = "xml"
        with pytest.raises(ConfigError, match="format"):
            ExperimentConfig.from_json_dict(record)

    @pytest.mark.parametrize("seeds", [[], [1, 1]])
    def test_bad_seed_lists(self, seeds):
        with pytest.raises(ConfigError, match="seeds"):
            ExperimentConfig.from_json_dict(minimal_record(seeds=seeds))

    @pytest.mark.parametrize("fraction", [0.0, -0.5, 1.5])
    def test_fractions_outside_unit_interval(self, fraction):
        with pytest.raises(ConfigError, match="fractions"):
            ExperimentConfig.from_json_dict(minimal_record(fractions=[fraction]))

    def test_median_protocol_needs_exactly_five_seeds(self):
        record = minimal_record(seeds=[0, 1, 2], protocol={"kind": "tacred_median"})
        with pytest.raises(ConfigError, match="exactly 5"):
            ExperimentConfig.from_json_dict(record)
        ok = minimal_record(seeds=[0, 1, 2, 3, 4],
                            protocol={"kind": "tacred_median"})
        assert ExperimentConfig.from_json_dict(ok).protocol.kind == "tacred_median"

    def test_ci_protocol_needs_two_seeds(self):
        with pytest.raises(ConfigError, match="at least 2"):
            ExperimentConfig.from_json_dict(minimal_record(seeds=[0]))

    def test_workers_must_be_positive(self):
        with pytest.raises(ConfigError, match="workers"):
            ExperimentConfig.from_json_dict(minimal_record(workers=0))

    def test_v_interpreter_requires_explanations(self):
        record = minimal_record()
        record["v_interpreter"] = {"kind": "hash", "dim": 4}
        with pytest.raises(ConfigError, match="explanations"):
            ExperimentConfig.from_json_dict(record)

    def test_extras_must_be_ontology(self):
        record = full_record()
        record["extras"][0]["interpreter"] = {"kind": "hash", "dim": 4}
        with pytest.raises(ConfigError, match="ontology"):
            ExperimentConfig.from_json_dict(record)

    def test_duplicate_extras_source_rejected(self):
        record = full_record()
        record["extras"].append(json.loads(json.dumps(record["extras"][0])))
        with pytest.raises(ConfigError, match="duplicate"):
            ExperimentConfig.from_json_dict(record)

    def test_unknown_protocol_kind(self):
        with pytest.raises(ConfigError, match="protocol"):
            ProtocolSpec(kind="best_of_three")


class TestGridSpec:
    def test_full_grid_has_sixty_four_points(self):
        configs = GridSpec(full=True).enumerate()
        assert len(configs) == 64
        assert len({c.config_hash() for c in configs}) == 64

    def test_axes_cartesian_product(self):
        spec = GridSpec(hidden_layers=(0, 1), dropout=(0.0, 0.2), hidden_dim=(64,))
        configs = spec.enumerate()
        assert len(configs) == 4
        assert {(c.hidden_layers, c.dropout) for c in configs} == {
            (0, 0.0), (0, 0.2), (1, 0.0), (1, 0.2)}

    def test_default_spec_yields_single_config(self):
        assert len(GridSpec().enumerate()) == 1

    def test_shared_hyperparameters_applied_everywhere(self):
        spec = GridSpec(full=True, learning_rate=0.01, max_epochs=7, patience=None)
        for config in spec.enumerate():
            assert config.learning_rate == 0.01
            assert config.max_epochs == 7
            assert config.patience is None

    @pytest.mark.parametrize(
        "record",
        [
            {"hidden_layers": []},
            {"hidden_layers": 1},
            {"hidden_dim": [100]},
            {"dropout": [0.5]},
        ],
    )
    def test_invalid_axes_rejected_at_parse_time(self, record):
        with pytest.raises(ConfigError):
            GridSpec.from_dict(record, "config.grid")

    @pytest.mark.parametrize(
        "record",
        [
            {"full": 1},
            {"learning_rate": [0.05]},
            {"learning_rate": "fast"},
            {"max_epochs": 7.5},
            {"max_epochs": [30]},
            {"patience": "none"},
        ],
    )
    def test_mistyped_shared_fields_rejected_at_parse_time(self, record):
        """A wrong JSON type raises ConfigError, never a bare TypeError."""
        with pytest.raises(ConfigError, match="config.grid"):
            GridSpec.from_dict(record, "config.grid")

    def test_grid_dict_round_trip(self):
        spec = GridSpec(full=False, hidden_layers=(0, 1), patience=None)
        assert GridSpec.from_dict(spec.to_dict(), "config.grid") == spec


class TestPathValidation:
    def build(self, tmp_path, **tweaks):
        dataset_dir = tmp_path / "data"
        dataset_dir.mkdir(exist_ok=True)
        explanations = tmp_path / "explanations.jsonl"
        explanations.write_text("")
        record = minimal_record(
            dataset={"path": str(dataset_dir), "format": "jsonl"})
        record["explanations"] = str(explanations)
        record.update(tweaks)
        return ExperimentConfig.from_json_dict(record)

    def test_existing_paths_pass(self, tmp_path):
        self.build(tmp_path).validate_paths()

    def test_missing_dataset_dir(self, tmp_path):
        cfg = self.build(tmp_path, dataset={"path": str(tmp_path / "gone"),
                                            "format": "jsonl"})
        with pytest.raises(ConfigError, match="dataset"):
            cfg.validate_paths()

    def test_missing_explanations_file(self, tmp_path):
        cfg = self.build(tmp_path, explanations=str(tmp_path / "gone.jsonl"))
        with pytest.raises(ConfigError, match="explanations"):
            cfg.validate_paths()

    def test_missing_feature_store(self, tmp_path):
        cfg = self.build(
            tmp_path,
            u_interpreter={"kind": "feature_store", "dim": 4,
                           "store_path": str(tmp_path / "gone.expf")})
        with pytest.raises(ConfigError, match="store"):
            cfg.validate_paths()

    def test_missing_ontology_dictionary(self, tmp_path):
        cfg = self.build(tmp_path)
        record = cfg.to_json_dict()
        record["extras"] = [{
            "source_id": "onto",
            "interpreter": {
                "kind": "ontology", "dim": 6,
                "dictionary_paths": [str(tmp_path / f"d{i}.tsv") for i in range(6)],
            },
        }]
        cfg = ExperimentConfig.from_json_dict(record)
        with pytest.raises(ConfigError, match="dictionary"):
            cfg.validate_paths()


class TestCacheFileNaming:
    def test_convention(self, tmp_path):
        spec = InterpreterSpec(kind="hash", dim=768)
        path = cache_file(tmp_path, "u", spec)
        assert path == tmp_path / "u_hash_d768.expf"

    def test_role_and_dim_distinguish_files(self, tmp_path):
        a = cache_file(tmp_path, "u", InterpreterSpec(kind="hash", dim=8))
        b = cache_file(tmp_path, "v", InterpreterSpec(kind="hash", dim=8))
        c = cache_file(tmp_path, "u", InterpreterSpec(kind="hash", dim=16))
        assert len({a, b, c}) == 3
