from pathlib import Path


def mini_fixture_dir() -> Path:
    """Bundled 21-relation x 5-subject replay set (test/train/truth + recorded replies)."""
    return Path(__file__).parent / "mini"
