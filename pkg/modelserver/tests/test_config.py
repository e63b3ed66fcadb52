"""Config parsing, adapter selection, and the refuse-to-start path."""

from __future__ import annotations

import pytest

from modelserver import ModelLoadError, RuleAdapter, load_config
from modelserver.__main__ import main
from modelserver.config import parse_config_text


def test_defaults():
    config = load_config(None)
    assert config.adapter == "rule"
    assert config.port == 9000
    assert config.workers == 4
    assert set(config.translate_models) == {"fr", "de", "es", "ru"}
    assert isinstance(config.build_adapter(), RuleAdapter)


def test_parse_config_text_full():
    values = parse_config_text(
        "# comment\n"
        "adapter = transformers\n"
        "port = 9100\n"
        "workers = 2\n"
        "fill_mask_model = bert-large-uncased\n"
        "translate_model.fr = acme/en-fr\n"
    )
    assert values["adapter"] == "transformers"
    assert values["port"] == 9100
    assert values["translate_models"]["fr"] == "acme/en-fr"
    assert values["translate_models"]["de"].startswith("Helsinki-NLP/")


@pytest.mark.parametrize(
    ("text", "match"),
    [
        ("just words\n", "line 1: expected key=value"),
        ("port = many\n", "line 1:"),
        ("colour = blue\n", "unknown key 'colour'"),
    ],
)
def test_parse_config_text_errors(text, match):
    with pytest.raises(ValueError, match=match):
        parse_config_text(text)


def test_load_config_missing_file(tmp_path):
    with pytest.raises(ValueError, match="config file not found"):
        load_config(tmp_path / "nope.cfg")


def test_config_validation():
    with pytest.raises(ValueError, match="unknown adapter"):
        load_config(None, {"adapter": "oracle"})
    with pytest.raises(ValueError, match="workers >= 1"):
        load_config(None, {"workers": 0})
    with pytest.raises(ValueError, match="unsupported translate languages"):
        load_config(None, {"translate_models": {"xx": "m"}})


def test_transformers_adapter_refuses_to_start_without_weights(monkeypatch):
    monkeypatch.setenv("HF_HUB_OFFLINE", "1")
    monkeypatch.setenv("TRANSFORMERS_OFFLINE", "1")
    config = load_config(
        None,
        {
            "adapter": "transformers",
            "ner_model": "missing/never-downloaded-ner",
        },
    )
    with pytest.raises(ModelLoadError, match="missing/never-downloaded-ner"):
        config.build_adapter()


def test_main_prints_diagnostic_and_refuses(monkeypatch, capsys, tmp_path):
    cfg = tmp_path / "server.cfg"
    cfg.write_text("adapter = transformers\n", encoding="utf-8")
    monkeypatch.setattr(
        "modelserver.config.ServerConfig.build_adapter",
        lambda self: (_ for _ in ()).throw(ModelLoadError("cannot load ner model")),
    )
    assert main(["--config", str(cfg)]) == 1
    assert "error: cannot load ner model" in capsys.readouterr().err


def test_main_rejects_bad_usage(capsys):
    assert main(["--config", "/no/such.cfg"]) == 2
    assert "config file not found" in capsys.readouterr().err
