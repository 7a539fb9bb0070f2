"""Run the acceptance suite and print only the per-criterion verdicts."""

import subprocess
import sys
from pathlib import Path

root = Path(__file__).resolve().parent.parent
proc = subprocess.run(
    [sys.executable, "-m", "pytest", str(root / "tests" / "test_acceptance.py"), "-q", "-p", "no:cacheprovider"],
    capture_output=True, text=True, cwd=root,
)
lines = [l for l in proc.stdout.splitlines() if l.startswith("criterion ")]
# each line appears in captured output and in the summary section; keep one copy
print("\n".join(sorted(set(lines), key=lambda l: int(l.split()[1]))))
sys.exit(proc.returncode)
