"""Run every bundled config through the command line entry point.

The Pohozaev check reads the solution dumped by the existence run, so the
configs run in order into one output directory.
"""

import sys
import tempfile
from pathlib import Path

from critlap import io
from critlap.cli import main

here = Path(__file__).resolve().parent / "configs"
order = [
    ("eigen", "eigen_disk"),
    ("constants", "constants_aniso"),
    ("minimize", "minimize_vector"),
    ("certify-exist", "exist_ball"),
    ("pohozaev-check", "pohozaev_ball"),
    ("certify-nonexist", "nonexist_disk"),
    ("bubble-asymptotics", "bubble"),
]
out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(tempfile.mkdtemp(prefix="critlap-demo-"))
out.mkdir(parents=True, exist_ok=True)
for task, name in order:
    src = here / f"{name}.toml"
    cfg = out / src.name
    cfg.write_bytes(src.read_bytes())
    code = main([task, "--config", str(cfg), "--out", str(out), "--deterministic"])
    rep = io.read_report(out / f"{name}.report")
    keys = [k for k in rep if not k.startswith("config.") and k.endswith(("kind", "lambda1.value", "constants.N", "K_inv_estimate", "relative_residual"))]
    print(f"{task:>18}: exit {code}  " + "  ".join(f"{k} = {rep[k]}" for k in keys[:3]))
print(f"reports in {out}")
