"""Shared fixtures: a tiny random-weight encoder, built offline at test time.

The conformance suite needs a real tokenizer/encoder/head stack but not a
meaningful one, so it constructs a two-layer model with a hand-written
vocabulary and random weights. No network access is required or allowed.
"""

from __future__ import annotations

import os

import pytest
import torch

os.environ.setdefault("HF_HUB_OFFLINE", "1")
os.environ.setdefault("TRANSFORMERS_OFFLINE", "1")

VOCAB = [
    "[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]",
    "alice", "ben", "carol", "david", "is", "are", "married", "to", "with",
    "works", "the", "a", "spouse", "of", "and", "wedding", "had", "met",
]
HIDDEN = 32
MAX_LENGTH = 24


@pytest.fixture(scope="session")
def model_dir(tmp_path_factory) -> str:
    from transformers import BertConfig, BertForSequenceClassification, \
        BertTokenizerFast

    directory = tmp_path_factory.mktemp("tiny-nli-model")
    vocab_file = directory / "vocab.txt"
    vocab_file.write_text("\n".join(VOCAB) + "\n", encoding="utf-8")
    tokenizer = BertTokenizerFast(vocab_file=str(vocab_file),
                                  model_max_length=MAX_LENGTH)

    config = BertConfig(
        vocab_size=len(VOCAB),
        hidden_size=HIDDEN,
        num_hidden_layers=2,
        num_attention_heads=2,
        intermediate_size=37,
        max_position_embeddings=48,
        num_labels=3,
        id2label={0: "CONTRADICTION", 1: "NEUTRAL", 2: "ENTAILMENT"},
        label2id={"CONTRADICTION": 0, "NEUTRAL": 1, "ENTAILMENT": 2},
    )
    torch.manual_seed(0)
    model = BertForSequenceClassification(config)
    model.save_pretrained(directory)
    tokenizer.save_pretrained(directory)
    return str(directory)


@pytest.fixture(scope="session")
def service_config(model_dir):
    from nli_service import ServiceConfig

    return ServiceConfig(model_id=model_dir, max_batch=32)


@pytest.fixture(scope="session")
def model(service_config):
    from nli_service import NliModel

    return NliModel(service_config)


@pytest.fixture(scope="session")
def app(model):
    from nli_service import create_app

    return create_app(model)


@pytest.fixture(scope="session")
def client(app):
    from fastapi.testclient import TestClient

    with TestClient(app) as test_client:
        yield test_client
