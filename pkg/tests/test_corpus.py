import pytest

from capeval.corpus import (
    RankingRun,
    SystemRun,
    load_corpus,
    load_run,
    save_corpus,
    save_run,
)
from capeval.errors import (
    CapevalError,
    DanglingReferenceError,
    DuplicateIdError,
    EmptyCaptionError,
    MalformedLineError,
)


def write(path, lines):
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return str(path)


@pytest.fixture
def tiny_files(tmp_path):
    videos = write(tmp_path / "videos.tsv", [
        "# synthetic",
        "v1\thttp://example.test/v1.mp4",
        "v2\t",
        "v3\thttp://example.test/v3.mp4",
    ])
    captions = write(tmp_path / "captions.tsv", [
        "# id\tvideo\tset\ttext",
        "a1\tv1\tA\ta dog runs in the park",
        "a2\tv2\tA\ta man rides a bike",
        "a3\tv3\tA\ttwo kids play football",
        "b1\tv1\tB\tthe dog is running outside",
        "b2\tv2\tB\tsomeone cycles down a road",
        "b3\tv3\tB\tchildren kick a ball",
    ])
    return captions, videos


def test_load_counts_and_sources(tiny_files):
    captions, videos = tiny_files
    corpus = load_corpus(captions, videos)
    assert len(corpus.videos) == 3
    assert len(corpus.captions) == 6
    assert corpus.set_labels() == ["A", "B"]
    assert corpus.counts_by_source() == {"human-A": 3, "human-B": 3}
    assert len(corpus.references_for("v1")) == 2


def test_load_empty_captions_file_errors(tmp_path, tiny_files):
    _, videos = tiny_files
    empty = write(tmp_path / "empty.tsv", ["# nothing here"])
    with pytest.raises(CapevalError, match="no captions"):
        load_corpus(empty, videos)


def test_dangling_video_reference_names_the_video(tmp_path, tiny_files):
    _, videos = tiny_files
    bad = write(tmp_path / "bad.tsv", ["c1\tv99\tA\tsome caption text"])
    with pytest.raises(DanglingReferenceError, match="v99"):
        load_corpus(bad, videos)


def test_duplicate_caption_id_rejected(tmp_path, tiny_files):
    _, videos = tiny_files
    bad = write(tmp_path / "dup.tsv", [
        "c1\tv1\tA\tfirst text here",
        "c1\tv2\tA\tsecond text here",
    ])
    with pytest.raises(DuplicateIdError, match="c1"):
        load_corpus(bad, videos)


def test_malformed_line_reports_line_number(tmp_path, tiny_files):
    _, videos = tiny_files
    bad = write(tmp_path / "mal.tsv", [
        "c1\tv1\tA\tfine text",
        "not a valid line",
    ])
    with pytest.raises(MalformedLineError, match="2"):
        load_corpus(bad, videos)


def test_missing_caption_id_assigned_deterministically(tmp_path, tiny_files):
    _, videos = tiny_files
    captions = write(tmp_path / "auto.tsv", ["\tv1\tA\ta dog runs"])
    corpus = load_corpus(captions, videos)
    assert "human-A:v1" in corpus.captions


def test_roundtrip_persistence(tmp_path, tiny_files):
    captions, videos = tiny_files
    corpus = load_corpus(captions, videos)
    out = tmp_path / "store"
    cap_path, vid_path = save_corpus(corpus, str(out))
    reloaded = load_corpus(cap_path, vid_path)
    assert reloaded.captions == corpus.captions
    assert reloaded.videos == corpus.videos
    assert reloaded.sets == corpus.sets


def test_load_description_run(tmp_path, tiny_files):
    captions, videos = tiny_files
    corpus = load_corpus(captions, videos)
    run_path = write(tmp_path / "runx.tsv", [
        "v1\ta dog is playing",
        "v2\tsomeone rides a bicycle",
    ])
    run = load_run(run_path, "description", corpus)
    assert isinstance(run, SystemRun)
    assert run.run_id == "runx"
    assert len(run) == 2


def test_run_duplicate_video_rejected(tmp_path, tiny_files):
    captions, videos = tiny_files
    corpus = load_corpus(captions, videos)
    run_path = write(tmp_path / "dup.tsv", ["v1\tone", "v1\ttwo"])
    with pytest.raises(DuplicateIdError, match="v1"):
        load_run(run_path, "description", corpus)


def test_run_unknown_video_rejected(tmp_path, tiny_files):
    captions, videos = tiny_files
    corpus = load_corpus(captions, videos)
    run_path = write(tmp_path / "unk.tsv", ["v9\tcaption"])
    with pytest.raises(DanglingReferenceError, match="v9"):
        load_run(run_path, "description", corpus)


def test_run_empty_caption_rejected(tmp_path, tiny_files):
    captions, videos = tiny_files
    corpus = load_corpus(captions, videos)
    run_path = write(tmp_path / "emp.tsv", ["v1\t "])
    with pytest.raises(EmptyCaptionError):
        load_run(run_path, "description", corpus)


def test_load_ranking_run_and_permutation_invariant(tmp_path, tiny_files):
    captions, videos = tiny_files
    corpus = load_corpus(captions, videos)
    good = write(tmp_path / "rank.tsv", [
        "v1\ta1,a2,a3",
        "v2\ta2,a3,a1",
    ])
    run = load_run(good, "ranking", corpus)
    assert isinstance(run, RankingRun)
    assert run.rankings["v2"] == ("a2", "a3", "a1")

    incomplete = write(tmp_path / "rank_bad.tsv", [
        "v1\ta1,a2,a3",
        "v2\ta2,a3",
    ])
    with pytest.raises(CapevalError, match="permutation"):
        load_run(incomplete, "ranking", corpus)

    dup = write(tmp_path / "rank_dup.tsv", ["v1\ta1,a1,a2"])
    with pytest.raises(DuplicateIdError):
        load_run(dup, "ranking", corpus)


def test_save_run_roundtrip(tmp_path, tiny_files):
    captions, videos = tiny_files
    corpus = load_corpus(captions, videos)
    run = SystemRun("r", "g", {"v1": "a caption", "v2": "another one"})
    path = tmp_path / "run.tsv"
    save_run(run, str(path))
    again = load_run(str(path), "description", corpus, run_id="r")
    assert again.captions == run.captions
