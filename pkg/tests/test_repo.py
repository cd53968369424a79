import pytest

from eplab.repo import IntegrityError, Repository, RepoError, UnknownDigestError


def test_put_get_roundtrip(tmp_path):
    repo = Repository(tmp_path / "repo")
    digest = repo.put_text("hello artifacts\n", "trace", name="first")
    assert repo.get_text(digest) == "hello artifacts\n"
    info = repo.info(digest)
    assert info.kind == "trace"
    assert info.names == ("first",)
    assert info.size == len("hello artifacts\n")


def test_content_addressing_dedupes(tmp_path):
    repo = Repository(tmp_path)
    d1 = repo.put_text("same", "sweep")
    d2 = repo.put_text("same", "sweep")
    assert d1 == d2
    assert len(repo.list("sweep")) == 1


def test_kind_conflict_rejected(tmp_path):
    repo = Repository(tmp_path)
    repo.put_text("blob", "sweep")
    with pytest.raises(RepoError):
        repo.put_text("blob", "trace")


def test_resolve_names_and_digests(tmp_path):
    repo = Repository(tmp_path)
    digest = repo.put_text("data", "fit", name="my-fit")
    assert repo.resolve("my-fit") == digest
    assert repo.resolve(digest) == digest
    with pytest.raises(UnknownDigestError):
        repo.resolve("nonexistent")


def test_unknown_digest(tmp_path):
    repo = Repository(tmp_path)
    with pytest.raises(UnknownDigestError):
        repo.get_bytes("ff" * 32)


def test_integrity_verified_on_read(tmp_path):
    repo = Repository(tmp_path)
    digest = repo.put_text("pristine", "trace")
    path = repo._object_path(digest)
    path.write_text("tampered")
    with pytest.raises(IntegrityError):
        repo.get_bytes(digest)


def test_list_filters_by_kind(tmp_path):
    repo = Repository(tmp_path)
    repo.put_text("a", "trace")
    repo.put_text("b", "sweep")
    repo.put_text("c", "sweep")
    assert len(repo.list()) == 3
    assert len(repo.list("sweep")) == 2
    assert {i.kind for i in repo.list("trace")} == {"trace"}


def test_reopen_preserves_everything(tmp_path):
    root = tmp_path / "r"
    digest = Repository(root).put_text("persisted", "sweep", name="n")
    reopened = Repository(root)
    assert reopened.get_text(digest) == "persisted"
    assert reopened.resolve("n") == digest
