import json
from pathlib import Path

import numpy as np
import pytest

from boardrec.data_model import Tweet, UserRecord
from boardrec.pipeline import (
    IngestError, PipelineConfig, SynthSpec, generate_synthetic, ingest, load_model, run_evaluate,
    run_recommend, run_sweep, run_train, save_model, write_dataset, write_synthetic,
)
from boardrec.pipeline.cli import main
from boardrec.pipeline.persistence import dumps_model
from boardrec.pipeline.records import FILES, iter_records, write_records
from boardrec.pipeline.runner import PipelineError, filter_active, split_users

FAST = dict(min_tweets=0, dim=256, iterations=200)


def make_user(uid, n):
    return UserRecord(uid, tuple(Tweet(uid, f"tweet {i}") for i in range(n)), ())


@pytest.fixture(scope="module")
def corpus_dir(tmp_path_factory, small_corpus):
    out = tmp_path_factory.mktemp("corpus")
    write_synthetic(small_corpus, out)
    return out


def cfg(data_dir, **kw):
    return PipelineConfig(data_dir=str(data_dir), **{**FAST, **kw})


# -- ingest -------------------------------------------------------------------


def three_user_fixture(root: Path, users=None, boards=None):
    write_records(root / FILES["users"], "users", users or [
        {"user_id": "u1", "tweets": ["hello world"], "board_ids": ["b1"]},
        {"user_id": "u2", "tweets": [{"text": "cake time", "timestamp": 5}], "board_ids": []},
        {"user_id": "u3", "tweets": [], "board_ids": []},
    ])
    write_records(root / FILES["boards"], "boards", boards or [
        {"board_id": "b1", "owner_id": "u1", "title": "Cakes", "popularity": 3, "pin_ids": ["p1"]},
    ])
    write_records(root / FILES["pins"], "pins", [
        {"pin_id": "p1", "board_id": "b1", "description": "cake", "embedding": [0.5, 1.0]},
    ])


def test_ingest_counts(tmp_path):
    three_user_fixture(tmp_path)
    ds = ingest(tmp_path)
    assert ds.counts() == {"users": 3, "boards": 1, "pins": 1, "topics": 0, "tweets": 2}
    assert not ds.warnings
    assert ds.users["u2"].tweets[0].timestamp == 5


def test_ingest_missing_user_id_names_line(tmp_path):
    three_user_fixture(tmp_path, users=[{"user_id": "u1"}, {"tweets": []}])
    with pytest.raises(IngestError) as err:
        ingest(tmp_path)
    assert err.value.line == 3 and "users.jsonl" in err.value.path and "user_id" in str(err.value)


def test_ingest_duplicate_id(tmp_path):
    three_user_fixture(tmp_path, users=[{"user_id": "u1"}, {"user_id": "u1"}])
    with pytest.raises(IngestError, match="duplicate"):
        ingest(tmp_path)


def test_ingest_unknown_owner_warning(tmp_path):
    three_user_fixture(tmp_path, boards=[
        {"board_id": "b1", "owner_id": "u1", "title": "a", "pin_ids": ["p1"]},
        {"board_id": "b2", "owner_id": "ghost", "title": "b"},
    ])
    assert ingest(tmp_path).warnings["board_unknown_owner"] == 1


def test_ingest_bad_header_and_json(tmp_path):
    p = tmp_path / "x.jsonl"
    p.write_text('{"schema": "boardrec.pins", "version": 1}\n')
    with pytest.raises(IngestError, match="boardrec.users"):
        list(iter_records(p, "users"))
    p.write_text('{"schema": "boardrec.users", "version": 1}\n{oops\n')
    with pytest.raises(IngestError) as err:
        list(iter_records(p, "users"))
    assert err.value.line == 2


def test_ingest_round_trip(tmp_path, small_corpus):
    write_dataset(small_corpus.dataset, tmp_path / "a")
    ds = ingest(tmp_path / "a")
    assert ds.users == small_corpus.dataset.users
    assert ds.boards == small_corpus.dataset.boards
    assert ds.pins == small_corpus.dataset.pins
    assert ds.ontology.to_records() == small_corpus.dataset.ontology.to_records()
    write_dataset(ds, tmp_path / "b")
    for name in FILES.values():
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


# -- filtering, split, config -----------------------------------------------


def test_filter_active_thresholds():
    users = [make_user("a", 150), make_user("b", 200), make_user("c", 0)]
    assert [u.user_id for u in filter_active(users)] == ["b"]
    assert filter_active(users, 0) == users
    with pytest.raises(ValueError):
        filter_active(users, -1)


def test_split_is_stable_and_order_free():
    users = [make_user(f"u{i}", 1) for i in range(500)]
    tr, te = split_users(users, 0.2, 0)
    tr2, te2 = split_users(users[::-1], 0.2, 0)
    assert {u.user_id for u in te} == {u.user_id for u in te2}
    assert 60 <= len(te) <= 140


def test_config_validation(tmp_path):
    with pytest.raises(ValueError, match="feature_mode"):
        PipelineConfig(feature_mode="words")
    with pytest.raises(ValueError, match="threshold"):
        PipelineConfig(threshold=1.0)
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"classifier": "br", "m": 3}))
    c = PipelineConfig.from_file(p, m=4)
    assert c.classifier == "br" and c.m == 4
    p.write_text(json.dumps({"bogus": 1}))
    with pytest.raises(ValueError, match="unknown config keys"):
        PipelineConfig.from_file(p)


# -- synthetic corpus ---------------------------------------------------------


def test_synth_deterministic(tmp_path):
    spec = SynthSpec(n_users=10, n_topics=4, tweets_per_user=5, seed=9)
    write_synthetic(generate_synthetic(spec), tmp_path / "a", spec)
    write_synthetic(generate_synthetic(spec), tmp_path / "b", spec)
    for name in list(FILES.values()) + ["truth.json"]:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_synth_noise_free_vocabulary(small_corpus):
    for uid, topics in small_corpus.truth.items():
        assert len(topics) == 1
        allowed = set(small_corpus.vocab[topics[0]])
        words = {w for t in small_corpus.dataset.users[uid].tweets for w in t.text.split()}
        assert words <= allowed


def test_synth_rejects_bad_sizes():
    with pytest.raises(ValueError):
        SynthSpec(n_users=0)
    with pytest.raises(ValueError):
        SynthSpec(noise=1.5)


# -- train / evaluate -----------------------------------------------------------


@pytest.mark.parametrize("kind", ["br", "lp", "rakel"])
def test_noise_free_corpus_is_learned(corpus_dir, kind):
    _, report = run_train(cfg(corpus_dir, classifier=kind, k=2, M=6, learning_rate=1.0, iterations=300))
    assert report.macro_ex >= 0.95
    assert 0 <= report.macro_label <= 1 and 0 <= report.shuffled_macro_ex <= 1
    assert report.n_train + report.n_test == 60


def test_train_is_deterministic(corpus_dir):
    b1, r1 = run_train(cfg(corpus_dir))
    b2, r2 = run_train(cfg(corpus_dir))
    assert dumps_model(b1) == dumps_model(b2)
    d1, d2 = r1.as_dict(), r2.as_dict()
    d1.pop("wall_time"), d2.pop("wall_time")
    assert d1 == d2


def test_rakel_k_too_large(corpus_dir):
    with pytest.raises(ValueError):
        run_train(cfg(corpus_dir, classifier="rakel", k=7, M=1))


def test_too_few_users(corpus_dir):
    with pytest.raises(PipelineError, match="fewer than 2"):
        run_train(cfg(corpus_dir, min_tweets=21))


@pytest.mark.parametrize("kind", ["br", "lp", "rakel"])
def test_persistence_round_trip(corpus_dir, tmp_path, kind):
    config = cfg(corpus_dir, classifier=kind, k=2, M=4)
    bundle, report = run_train(config)
    path = tmp_path / "m.json"
    save_model(bundle, path)
    loaded = load_model(path)
    assert dumps_model(loaded) == path.read_bytes()
    again = run_evaluate(config, loaded)
    assert again.macro_ex == report.macro_ex and again.per_label == report.per_label


# -- recommend ------------------------------------------------------------------


@pytest.fixture(scope="module")
def lp_bundle(corpus_dir):
    return run_train(cfg(corpus_dir, learning_rate=1.0, iterations=300))[0]


def test_recommend_single_topic_user(corpus_dir, lp_bundle, small_corpus):
    topic = small_corpus.topic_names[2]
    words = small_corpus.vocab[topic]
    tweets = [" ".join(words[i:i + 4]) for i in range(0, len(words), 4)]
    rec = run_recommend(cfg(corpus_dir, m=3), lp_bundle, tweets)
    assert rec.status == "ok"
    assert [t.name for t in rec.topics] == [topic]
    ds = small_corpus.dataset
    for bid in rec.topics[0].board_ids:
        assert topic in ds.boards[bid].title
    assert len(rec.topics[0].board_ids) == 3 and rec.topics[0].solver == "exact"


def test_recommend_empty_timeline(corpus_dir, lp_bundle):
    rec = run_recommend(cfg(corpus_dir), lp_bundle, [])
    assert rec.status == "no features" and rec.topics == []


def test_recommend_insufficient_candidates(corpus_dir, lp_bundle, small_corpus):
    topic = small_corpus.topic_names[0]
    tweets = [" ".join(small_corpus.vocab[topic])]
    rec = run_recommend(cfg(corpus_dir, m=50, k_candidates=60), lp_bundle, tweets)
    t = rec.topics[0]
    assert t.status == "insufficient candidates" and len(t.board_ids) == t.n_candidates < 50


@pytest.mark.filterwarnings("ignore::boardrec.multilabel.CoverageWarning")
def test_sweep_rows(corpus_dir):
    rows = run_sweep(cfg(corpus_dir, iterations=50), ks=[2, 9], Ms=[2])
    assert [(r["classifier"], r["k"], r["M"]) for r in rows] == [("br", None, None), ("lp", None, None), ("rakel", 2, 2)]


# -- command line -------------------------------------------------------------


def test_cli_end_to_end(tmp_path, capsys):
    data = tmp_path / "syn"
    assert main(["synth", "--out", str(data), "--n-users", "30", "--n-topics", "4", "--tweets-per-user", "10",
                 "--vocab-per-topic", "8", "--labels-per-user", "1", "--noise", "0", "--seed", "1"]) == 0
    common = ["--data-dir", str(data), "--min-tweets", "5", "--dim", "128", "--model-path", str(tmp_path / "m.json")]
    assert main(["ingest-check", *common]) == 0
    assert json.loads(capsys.readouterr().out.strip().splitlines()[-1])["users"] == 30
    assert main(["train", *common]) == 0
    assert "F1 macro-ex" in capsys.readouterr().out
    report = json.loads((tmp_path / "m.report.json").read_text())
    assert report["classifier"] == "lp" and report["config"]["dim"] == 128
    assert main(["evaluate", *common, "--split", "all"]) == 0
    user = sorted(ingest(data).users)[0]
    assert main(["recommend", *common, "--user", user, "--m", "2", "--out", str(tmp_path / "rec.json")]) == 0
    assert json.loads((tmp_path / "rec.json").read_text())["status"] in {"ok", "no predicted topics"}
    assert main(["profile", *common, "--out", str(tmp_path / "prof.jsonl")]) == 0
    assert main(["featurize", *common, "--out", str(tmp_path / "feat.jsonl")]) == 0
    feats = [r for _, r in iter_records(tmp_path / "feat.jsonl", "features")]
    assert len(feats) == 30 and feats[0]["dim"] == 128 + 10
    assert main(["sweep", *common, "--ks", "2", "--Ms", "2", "--iterations", "20",
                 "--out", str(tmp_path / "sweep.jsonl")]) == 0
    assert "rakel" in capsys.readouterr().out


def test_cli_build_ontology(tmp_path, capsys):
    data = tmp_path / "syn"
    assert main(["synth", "--out", str(data), "--n-users", "12", "--n-topics", "3", "--tweets-per-user", "2"]) == 0
    capsys.readouterr()
    out = tmp_path / "pruned.jsonl"
    assert main(["build-ontology", "--data-dir", str(data), "--raw", str(data / "ontology.jsonl"),
                 "--out", str(out), "--pin-threshold", "0"]) == 0
    stats = json.loads(capsys.readouterr().out)
    assert stats["pruned"]["total"] == stats["raw"]["total"] == 3
    assert out.exists()


def test_cli_error_record(tmp_path, capsys):
    assert main(["ingest-check", "--data-dir", str(tmp_path / "missing")]) == 1
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "FileNotFoundError"
    bad = tmp_path / "bad"
    three_user_fixture(bad, users=[{"tweets": []}])
    assert main(["ingest-check", "--data-dir", str(bad)]) == 1
    err = json.loads(capsys.readouterr().err)
    assert err["line"] == 2 and err["file"].endswith("users.jsonl")
