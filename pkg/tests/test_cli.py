import json
import shutil
import subprocess

import numpy as np
import pytest

from helpers import build_dataset, rect_mask
from rfaug.cli import main
from rfaug.manifest import read_manifest, verify_manifest
from rfaug.model import load_dataset
from rfaug.pairing import PairingConfig, PairingCounters, candidate_pairs
from rfaug.testcards import write_testcards


def run_cli(capsys, *argv) -> tuple[int, dict]:
    code = main(list(argv))
    out = capsys.readouterr().out
    payload = json.loads(out) if out.strip() else {}
    return code, payload


@pytest.fixture(scope="module")
def small_cards(tmp_path_factory):
    # a handful of cards keeps generate runs quick in these tests
    return write_testcards(tmp_path_factory.mktemp("small"), count=8, seed=21)


class TestValidate:
    def test_clean_dataset_exits_zero(self, capsys, small_cards):
        code, payload = run_cli(capsys, "validate", "--root", str(small_cards))
        assert code == 0
        assert payload["ok"] is True
        assert payload["problems"] == []

    def test_empty_mask_exits_one_and_names_record(self, capsys, tmp_path):
        root = build_dataset(
            tmp_path / "ds",
            [
                {"sample_id": "ok_c1", "label": "ok", "mask": rect_mask(8, 8, 1, 6, 1, 6)},
                {"sample_id": "void_c1", "label": "void", "mask": np.zeros((8, 8), np.uint8)},
            ],
        )
        code, payload = run_cli(capsys, "validate", "--root", str(root))
        assert code == 1
        assert payload["ok"] is False
        assert any(p["sample_id"] == "void_c1" for p in payload["problems"])

    def test_missing_metadata_exits_two(self, capsys, tmp_path):
        code, payload = run_cli(capsys, "validate", "--root", str(tmp_path / "ghost"))
        assert code == 2
        assert payload["error"] == "missing_file"

    def test_missing_root_flag_exits_two(self, capsys):
        code, payload = run_cli(capsys, "validate")
        assert code == 2
        assert payload["error"] == "usage"


class TestGenerate:
    def test_writes_pngs_and_valid_manifest(self, capsys, small_cards, tmp_path):
        out = tmp_path / "out"
        code, payload = run_cli(
            capsys, "generate", "--root", str(small_cards), "--out", str(out),
            "--same-viewpoint", "off",
        )
        assert code == 0
        assert payload["written"] == payload["accepted"] > 0
        records = read_manifest(out / "manifest.jsonl")
        assert len(records) == payload["written"]
        idx = load_dataset(small_cards)
        assert verify_manifest(out / "manifest.jsonl", idx) == []
        for rec in records:
            assert rec.synthetic_path == (
                f"{rec.roi_source}__in__{rec.bg_source}__{rec.roi_mode}.png"
            )
            assert (out / rec.synthetic_path).is_file()
            assert rec.config_hash == payload["config_hash"]
            assert rec.label == idx.record(rec.roi_source).label

    def test_counts_match_library_enumeration(self, capsys, small_cards, tmp_path):
        out = tmp_path / "out"
        code, payload = run_cli(
            capsys, "generate", "--root", str(small_cards), "--out", str(out),
            "--ti", "0.3", "--match-attr", "age",
        )
        assert code == 0
        idx = load_dataset(small_cards)
        counters = PairingCounters()
        cfg = PairingConfig(t_i=0.3, match_attributes=("age",))
        wanted = list(candidate_pairs(idx, cfg, counters=counters))
        assert payload["accepted"] == len(wanted)
        assert payload["rejected"] == counters.rejected

    def test_rerun_produces_identical_bytes(self, capsys, small_cards, tmp_path):
        args = ["generate", "--root", str(small_cards), "--same-viewpoint", "off"]
        out_a = tmp_path / "a"
        out_b = tmp_path / "b"
        code, _ = run_cli(capsys, *args, "--out", str(out_a))
        assert code == 0
        code, _ = run_cli(capsys, *args, "--out", str(out_b))
        assert code == 0
        files_a = sorted(p.name for p in out_a.iterdir())
        files_b = sorted(p.name for p in out_b.iterdir())
        assert files_a == files_b
        for name in files_a:
            assert (out_a / name).read_bytes() == (out_b / name).read_bytes(), name

    def test_validation_failure_blocks_generation(self, capsys, tmp_path):
        root = build_dataset(
            tmp_path / "ds",
            [
                {"sample_id": "ok_c1", "label": "ok", "mask": rect_mask(8, 8, 1, 6, 1, 6)},
                {"sample_id": "void_c1", "label": "void", "mask": np.zeros((8, 8), np.uint8)},
            ],
        )
        out = tmp_path / "out"
        code, payload = run_cli(capsys, "generate", "--root", str(root), "--out", str(out))
        assert code == 1
        assert not (out / "manifest.jsonl").exists()


class TestPreview:
    def test_writes_grid(self, capsys, small_cards, tmp_path):
        out = tmp_path / "prev"
        code, payload = run_cli(
            capsys, "preview", "--root", str(small_cards), "--out", str(out),
            "--count", "3", "--same-viewpoint", "off",
        )
        assert code == 0
        assert payload["rows"] == 3
        assert (out / "preview.png").is_file()

    def test_nonpositive_count_is_usage_error(self, capsys, small_cards):
        code, payload = run_cli(
            capsys, "preview", "--root", str(small_cards), "--count", "0"
        )
        assert code == 2
        assert payload["error"] == "usage"

    def test_no_accepted_pairs_is_data_failure(self, capsys, small_cards, tmp_path):
        code, payload = run_cli(
            capsys, "preview", "--root", str(small_cards), "--out", str(tmp_path / "p"),
            "--ts", "1.0", "--size-rule", "similarity",
        )
        assert code == 1
        assert payload["ok"] is False


class TestStats:
    def test_summary_matches_generate_counts(self, capsys, small_cards):
        code, payload = run_cli(
            capsys, "stats", "--root", str(small_cards), "--same-viewpoint", "off"
        )
        assert code == 0
        idx = load_dataset(small_cards)
        counters = PairingCounters()
        list(candidate_pairs(idx, PairingConfig(require_same_viewpoint=False), counters=counters))
        assert payload["accepted"] == counters.accepted
        assert payload["considered"] == counters.considered
        assert payload["records"] == len(idx)

    def test_dump_augment_writes_image(self, capsys, small_cards, tmp_path):
        out = tmp_path / "dump"
        code, payload = run_cli(
            capsys, "stats", "--root", str(small_cards), "--out", str(out),
            "--probability", "1.0", "--same-viewpoint", "off",
            "--dump-augment", "0", "1",
        )
        assert code == 0
        dump = payload["dump"]
        assert dump["augmented"] in (True, False)
        assert (out / "augment_e0_i1.png").is_file()
        idx = load_dataset(small_cards)
        assert dump["label"] == idx[1].label

    def test_dump_augment_bad_index_is_usage_error(self, capsys, small_cards):
        code, payload = run_cli(
            capsys, "stats", "--root", str(small_cards), "--dump-augment", "0", "999"
        )
        assert code == 2


class TestConfigResolution:
    def test_config_file_supplies_values(self, capsys, small_cards, tmp_path):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps({"root": str(small_cards), "same_viewpoint": "off"}))
        code, payload = run_cli(capsys, "stats", "--config", str(cfg_path))
        assert code == 0
        assert payload["records"] == 8

    def test_flags_override_config_file(self, capsys, small_cards, tmp_path):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps({"root": str(small_cards), "ti": 0.3}))
        code, loose = run_cli(
            capsys, "stats", "--config", str(cfg_path), "--ti", "0.7",
            "--same-viewpoint", "off",
        )
        assert code == 0
        idx = load_dataset(small_cards)
        counters = PairingCounters()
        list(candidate_pairs(idx, PairingConfig(t_i=0.7, require_same_viewpoint=False), counters=counters))
        assert loose["accepted"] == counters.accepted

    def test_env_workers_applies_and_flag_wins(self, capsys, small_cards, tmp_path, monkeypatch):
        monkeypatch.setenv("RFAUG_WORKERS", "2")
        code, payload = run_cli(
            capsys, "generate", "--root", str(small_cards), "--out", str(tmp_path / "e"),
            "--same-viewpoint", "off",
        )
        assert code == 0 and payload["workers"] == 2
        code, payload = run_cli(
            capsys, "generate", "--root", str(small_cards), "--out", str(tmp_path / "f"),
            "--workers", "1", "--same-viewpoint", "off",
        )
        assert code == 0 and payload["workers"] == 1

    def test_config_file_beats_env_workers(self, capsys, small_cards, tmp_path, monkeypatch):
        monkeypatch.setenv("RFAUG_WORKERS", "2")
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps({"root": str(small_cards), "workers": 3, "same_viewpoint": "off"}))
        code, payload = run_cli(
            capsys, "generate", "--config", str(cfg_path), "--out", str(tmp_path / "g")
        )
        assert code == 0 and payload["workers"] == 3

    def test_bad_env_workers_is_usage_error(self, capsys, small_cards, monkeypatch):
        monkeypatch.setenv("RFAUG_WORKERS", "many")
        code, payload = run_cli(capsys, "validate", "--root", str(small_cards))
        assert code == 2

    def test_unknown_config_key_is_usage_error(self, capsys, small_cards, tmp_path):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps({"root": str(small_cards), "twist": 1}))
        code, payload = run_cli(capsys, "validate", "--config", str(cfg_path))
        assert code == 2

    def test_config_file_missing_is_usage_error(self, capsys, tmp_path):
        code, payload = run_cli(capsys, "validate", "--config", str(tmp_path / "none.json"))
        assert code == 2

    def test_bad_probability_is_usage_error(self, capsys, small_cards):
        code, payload = run_cli(
            capsys, "stats", "--root", str(small_cards), "--probability", "1.5"
        )
        assert code == 2

    def test_hyphenated_rule_values_normalize(self, capsys, small_cards):
        code, payload = run_cli(
            capsys, "stats", "--root", str(small_cards),
            "--size-rule", "as-written", "--shape-rule", "similarity",
        )
        assert code == 0


def test_console_script_is_wired(small_cards):
    exe = shutil.which("rfaug")
    assert exe, "console script not installed"
    proc = subprocess.run(
        [exe, "validate", "--root", str(small_cards)], capture_output=True, text=True
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["ok"] is True
