import json

import numpy as np
import pytest

from distread.sentiment import ModelConfig, SentimentModel, TrainConfig, save_weights, train
from distread.synthetic import make_stream, make_training_set, make_vocabulary

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def vocab():
    return make_vocabulary(seed=0)


@pytest.fixture(scope="session")
def table(vocab):
    return vocab.table.normalize_rows()


@pytest.fixture(scope="session")
def stream_model(vocab, table):
    """Small LSTM trained so that neutral text scores near 0.5."""
    data = make_training_set(vocab, 800, neutral_pairs=400, seed=1)
    model = SentimentModel.init(ModelConfig(embed_dim=table.dim, hidden_dim=8), seed=0)
    model, _ = train(model, data, TrainConfig(seed=0, lr=0.5), table)
    return model


def write_vec(path, table):
    from distread.embeddings import write_embeddings

    with open(path, "w", encoding="utf-8") as fh:
        write_embeddings(table, fh)
    return path


def write_jsonl(path, rows):
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")
    return path


@pytest.fixture(scope="session")
def pipeline_files(tmp_path_factory, vocab, stream_model):
    """Vectors, weights and a burst-injected stream on disk."""
    root = tmp_path_factory.mktemp("pipeline")
    rows, injected = make_stream(vocab, n=3400, seed=0)
    write_jsonl(root / "tweets.jsonl", rows)
    write_vec(root / "vectors.vec", vocab.table)
    with open(root / "model.mlsw", "wb") as fh:
        save_weights(stream_model, fh)
    ids = {pol: {rows[i]["id"] for i in idx} for pol, idx in injected.items()}
    return {
        "root": root,
        "corpus": root / "tweets.jsonl",
        "embeddings": root / "vectors.vec",
        "weights": root / "model.mlsw",
        "injected_ids": ids,
    }


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
