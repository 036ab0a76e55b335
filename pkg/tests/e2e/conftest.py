import os.path as osp

import pytest

from tests.e2e.models.cli_runner import CLIRunner

REPO_ROOT = osp.abspath(osp.join(osp.dirname(__file__), "..", ".."))
SAMPLE_PROFILES_DIR = osp.join(REPO_ROOT, "sample_profiles")

UT_PROFILE = osp.join(SAMPLE_PROFILES_DIR, "UT.json")
LINEAR_PROFILE = osp.join(SAMPLE_PROFILES_DIR, "linear.json")
UT_LINEAR_PROFILE = osp.join(SAMPLE_PROFILES_DIR, "ut_linear.json")


@pytest.fixture
def cli():
    """Provides a CLIRunner instance for invoking the shearwave command."""
    return CLIRunner()


@pytest.fixture
def out_csv(tmp_path):
    """Path of a results file inside a per-test temporary directory."""
    return str(tmp_path / "out.csv")
