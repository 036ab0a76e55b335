"""
CLI argument parsing tests.

Validates that shearwave handles argument combinations correctly,
including missing required args, unknown names and help output.
"""
import pytest


@pytest.mark.e2e
class TestCLIArguments:

    def test_no_arguments(self, cli):
        """A1: Running with no arguments should exit with code 2 and show usage."""
        result = cli.run_raw([])
        assert result.exit_code == 2
        assert "usage" in result.stderr.lower()

    def test_unknown_command(self, cli):
        """A2: An unknown subcommand is an argparse error."""
        result = cli.run_raw(["solve"])
        assert result.exit_code == 2
        assert "invalid choice" in result.stderr.lower()

    def test_missing_required_flag(self, cli):
        """A3: solve-forward without --k should name the missing flag."""
        result = cli.run_raw(["solve-forward", "--profile", "UT"])
        assert result.exit_code == 2
        assert "--k" in result.stderr

    def test_unknown_profile(self, cli):
        """A4: An unknown profile name is a usage error with a JSON payload."""
        result = cli.run("solve-forward", profile="nope", k="1")
        assert result.exit_code == 2
        assert result.payload["error"] == "InvalidArgumentError"
        assert "nope" in result.payload["message"]

    def test_help_shows_defaults(self, cli):
        """A5: Subcommand help documents the default N_z and tolerance."""
        result = cli.run_raw(["path", "--help"])
        assert result.exit_code == 0
        assert "default: 64" in result.stdout
        assert "default: 1e-11" in result.stdout

    def test_malformed_number_list(self, cli):
        """A6: A non-numeric wavenumber list is rejected by the parser."""
        result = cli.run_raw(["solve-forward", "--k", "1,two"])
        assert result.exit_code == 2
        assert "comma-separated" in result.stderr

    def test_verbose_flag(self, cli):
        """A7: --verbose prints the banner and the parsed arguments."""
        result = cli.run("solve-forward", profile="quiescent", k="1", Nz=16, verbose=1)
        assert result.exit_code == 0
        assert "running solve-forward with args" in result.stderr.lower()

    def test_version(self, cli):
        """A8: --version prints the program name."""
        result = cli.run_raw(["--version"])
        assert result.exit_code == 0
        assert "shearwave" in result.stdout
