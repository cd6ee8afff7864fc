import glob
import os
import subprocess
import sys

import pytest

DEMO_DIR = os.path.join(os.path.dirname(__file__), "..", "demos")


@pytest.mark.parametrize("script", sorted(glob.glob(os.path.join(DEMO_DIR, "*.py"))))
def test_demo_runs_clean(script):
    proc = subprocess.run([sys.executable, script], capture_output=True,
                          text=True, timeout=120)
    assert proc.returncode == 0, proc.stderr
    assert proc.stdout.strip()
