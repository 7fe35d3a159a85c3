"""bundle-control - Plurality voter control with bundled voters."""

import subprocess
from pathlib import Path

__version__ = "0.1.0"  # x-release-please-version


def get_git_commit() -> str | None:
    """Return the short hash of the checked-out commit, or None outside a git checkout."""
    try:
        result = subprocess.run(
            ["git", "rev-parse", "--short", "HEAD"],
            cwd=Path(__file__).parent.parent,
            capture_output=True,
            text=True,
            timeout=2,
        )
    except (subprocess.SubprocessError, FileNotFoundError, OSError):
        return None
    if result.returncode != 0:
        return None
    return result.stdout.strip() or None
