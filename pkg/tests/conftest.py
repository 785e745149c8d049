import pytest

from legadapt.cli import main
from legadapt.report import loads_report


class AcceptanceRun:
    """One execution of the bundled acceptance campaign via the CLI."""

    def __init__(self, exit_code, out_dir):
        self.exit_code = exit_code
        self.out_dir = out_dir
        self.summary = loads_report((out_dir / "summary.toml").read_text())

    def per_n(self, n, arm="per_n"):
        table = self.summary[arm] if arm == "per_n" \
            else self.summary["coverage_arm"]["per_n"]
        return table[str(n)]


@pytest.fixture(scope="session")
def acceptance_campaign(tmp_path_factory):
    """Run the bundled campaign once per session; several acceptance
    criteria read its summary."""
    out = tmp_path_factory.mktemp("acceptance")
    code = main(["simulate", "w_beta1.acceptance", "--out", str(out), "--check"])
    return AcceptanceRun(code, out)
