from pathlib import Path

import pytest

from hatelab.corpus import CleanPost

TESTS_DIR = Path(__file__).parent
DATA_DIR = TESTS_DIR / "data"


def make_post(post_id: str, tokens: list[str], text: str = "",
              source_id: str = "s1") -> CleanPost:
    """Bare CleanPost for feature/model tests; text only matters for the
    syllable unit."""
    return CleanPost(
        post_id=post_id,
        source_id=source_id,
        text=text or "".join(tokens),
        was_zawgyi=False,
        syllable_count=max(3, len(tokens)),
        tokens=list(tokens),
        lexicon_hits=[],
    )


@pytest.fixture(scope="session")
def golden_pairs() -> list[tuple[str, str]]:
    pairs = []
    for line in (DATA_DIR / "golden_pairs.tsv").read_text(encoding="utf-8").splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        zg, uni = line.split("\t")
        pairs.append((zg, uni))
    return pairs


@pytest.fixture(scope="session")
def detection_fixture() -> list[tuple[str, str]]:
    rows = []
    for line in (DATA_DIR / "detection_fixture.tsv").read_text(encoding="utf-8").splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        label, text = line.split("\t", 1)
        rows.append((label, text))
    return rows
