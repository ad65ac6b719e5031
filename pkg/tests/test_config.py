"""Config file parsing, flag merging, validation messages."""

import pytest

from andertree.config import (
    KNOWN_KEYS,
    ConfigError,
    ExperimentConfig,
    parse_config_file,
    resolve_config,
)


def write(tmp_path, text):
    p = tmp_path / "run.conf"
    p.write_text(text, encoding="utf-8")
    return str(p)


def test_parse_file(tmp_path):
    path = write(
        tmp_path,
        """
        # comment line
        k = 3
        gamma = 1.7   # trailing comment
        samples = 50

        output = out.jsonl
        """,
    )
    assert parse_config_file(path) == {
        "k": "3", "gamma": "1.7", "samples": "50", "output": "out.jsonl"
    }


def test_parse_file_unknown_key(tmp_path):
    path = write(tmp_path, "k = 2\nwibble = 3\n")
    with pytest.raises(ConfigError, match=r"run\.conf:2: unknown key 'wibble'"):
        parse_config_file(path)


def test_parse_file_missing_equals(tmp_path):
    path = write(tmp_path, "k 2\n")
    with pytest.raises(ConfigError, match="expected key = value"):
        parse_config_file(path)


def test_parse_file_unreadable():
    with pytest.raises(ConfigError, match="cannot read config file"):
        parse_config_file("/nonexistent/run.conf")


def test_defaults():
    cfg = resolve_config({}, {})
    assert cfg.k == 2 and cfg.gamma == 2.0 and cfg.radius == 62
    assert cfg.laplacian == "adjacency"
    assert cfg.distribution == "uniform" and cfg.dist_params == (-0.5, 0.5)
    assert cfg.lam == 3.0 and cfg.s == 0.5
    assert cfg.targets == "ray"
    assert cfg.etas == (1e-1, 1e-2, 1e-3, 1e-4)
    assert cfg.workers >= 1
    assert cfg.x1 is None and cfg.output is None


def test_flags_override_file():
    cfg = resolve_config({"k": "3", "radius": "10"}, {"radius": "20"})
    assert cfg.k == 3 and cfg.radius == 20


def test_lambda_key_maps_to_lam():
    cfg = resolve_config({"lambda": "4.5"}, {})
    assert cfg.lam == 4.5


def test_targets_forms():
    assert resolve_config({"targets": "RAY"}, {}).targets == "ray"
    assert resolve_config({"targets": "1, 5, 9"}, {}).targets == (1, 5, 9)
    with pytest.raises(ConfigError, match="targets must be an integer"):
        resolve_config({"targets": "a,b"}, {})
    with pytest.raises(ConfigError, match="targets"):
        resolve_config({"targets": ","}, {})


def test_type_errors():
    with pytest.raises(ConfigError, match="k must be an integer"):
        resolve_config({"k": "two"}, {})
    with pytest.raises(ConfigError, match="gamma must be a number"):
        resolve_config({"gamma": "big"}, {})


def test_validation_messages():
    cases = [
        ({"s": "1.2"}, r"s must lie in the open interval \(0, 1\), got 1.2"),
        ({"distribution": "bernoulli"}, "open problem"),
        ({"distribution": "levy"}, "distribution must be one of"),
        ({"k": "1"}, "k must be >= 2"),
        ({"gamma": "0.5"}, "gamma must be >= 1"),
        ({"laplacian": "spectral"}, "laplacian must be"),
        ({"dist_params": "1,2,3"}, "dist_params needs exactly 2"),
        ({"lambda": "0"}, "lambda must be > 0"),
        ({"eta": "0"}, "eta must be > 0"),
        ({"samples": "0"}, "samples must be >= 1"),
        ({"etas": "0.1, 0.2"}, "strictly descending"),
        ({"etas": "0.1, -0.2"}, "etas must all be > 0"),
        ({"L0": "4"}, "L0 must be >= 5"),
        ({"workers": "0"}, "workers must be >= 1"),
        ({"master_seed": "-1"}, "64 bits"),
        ({"pairs": "0"}, "pairs must be >= 1"),
    ]
    for raw, pattern in cases:
        with pytest.raises(ConfigError, match=pattern):
            resolve_config(raw, {})


def test_unknown_flag_key():
    with pytest.raises(ConfigError, match="unknown key"):
        resolve_config({}, {"wibble": "1"})


def test_config_is_frozen():
    cfg = ExperimentConfig()
    with pytest.raises(AttributeError):
        cfg.k = 5


def test_known_keys_cover_dataclass():
    # every flag key resolves to a config field (lambda -> lam)
    fields = set(ExperimentConfig.__dataclass_fields__)
    mapped = {("lam" if k == "lambda" else k) for k in KNOWN_KEYS}
    assert mapped == fields
