#!/usr/bin/env python3
"""Download the eight evaluation matrices from the SuiteSparse collection.

Usage:
    python scripts/fetch_suitesparse.py [DEST_DIR]

DEST_DIR defaults to $FSPGEMM_DATA_DIR, then ./data. Each matrix is
downloaded as a .tar.gz, and the contained .mtx is extracted flat into
DEST_DIR as <name>.mtx. Needs outbound network access; run it on a
machine that has it and point FSPGEMM_DATA_DIR at the result.
"""

from __future__ import annotations

import os
import shutil
import sys
import tarfile
import tempfile
import urllib.request
from pathlib import Path

BASE_URL = "https://suitesparse-collection-website.herokuapp.com/MM"

MATRICES = [
    ("FEMLAB", "poisson3Da"),
    ("Um", "2cubes_sphere"),
    ("Oberwolfach", "filter3D"),
    ("vanHeukelum", "cage12"),
    ("Hamm", "scircuit"),
    ("Williams", "mac_econ_fwd500"),
    ("Um", "offshore"),
    ("Williams", "webbase-1M"),
]


def fetch_one(group: str, name: str, dest: Path) -> Path:
    target = dest / f"{name}.mtx"
    if target.exists():
        print(f"  {name}: already present")
        return target
    url = f"{BASE_URL}/{group}/{name}.tar.gz"
    print(f"  {name}: downloading {url}")
    with tempfile.TemporaryDirectory() as tmp:
        archive = Path(tmp) / f"{name}.tar.gz"
        with urllib.request.urlopen(url) as resp, open(archive, "wb") as out:
            shutil.copyfileobj(resp, out)
        with tarfile.open(archive, "r:gz") as tar:
            member = next(m for m in tar.getmembers() if m.name.endswith(f"{name}.mtx"))
            member.name = os.path.basename(member.name)
            tar.extract(member, tmp)
            shutil.move(Path(tmp) / member.name, target)
    print(f"  {name}: wrote {target} ({target.stat().st_size} bytes)")
    return target


def main(argv: list[str]) -> int:
    dest = Path(argv[1]) if len(argv) > 1 else Path(os.environ.get("FSPGEMM_DATA_DIR", "data"))
    dest.mkdir(parents=True, exist_ok=True)
    print(f"fetching {len(MATRICES)} matrices into {dest}")
    failures = 0
    for group, name in MATRICES:
        try:
            fetch_one(group, name, dest)
        except Exception as exc:
            failures += 1
            print(f"  {name}: FAILED ({exc})", file=sys.stderr)
    if failures:
        print(f"{failures} downloads failed", file=sys.stderr)
        return 1
    print("done")
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
