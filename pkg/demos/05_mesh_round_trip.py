"""Drive the command line: write a mesh, then verify the mesh file alone.

The second pass knows nothing about the family; it fits splines through the
CSV and still finds relative nullity one at every grid point.
"""
import json
import tempfile
from pathlib import Path

from rwprn.cli import main

here = Path(__file__).resolve().parent
with tempfile.TemporaryDirectory() as tmp:
    cfg = here / "configs" / "spacelike_s3.json"
    print("construct ->", main(["construct", "--config", str(cfg), "--out", tmp]))
    mesh = Path(tmp) / "SpacelikeS3.csv"
    print("mesh rows:", sum(1 for _ in mesh.open()) - 1)
    print("verify --mesh ->", main(["verify", "--config", str(cfg), "--out", tmp, "--mesh", str(mesh),
                                    "--grid", "9x9"]))
    report = json.loads((Path(tmp) / "report.json").read_text())
    print("nullity histogram:", report["checks"][0]["details"]["nullity_histogram"])
    print("refused config ->", main(["construct", "--config", str(here / "configs" / "flat_exponential.json"),
                                     "--out", tmp]))
