"""Smoke test for the ccgeo_py extension.

Build the library first (``cargo build -p ccgeo-py --release``), then run
``python3 crates/py/python/smoke_test.py``. The script copies the built
``libccgeo_py.so`` to ``ccgeo_py.so`` in a temporary directory and imports it.
Set ``CCGEO_PY_LIB`` to point at a specific build.
"""

import math
import os
import shutil
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parents[3]


def find_library():
    env = os.environ.get("CCGEO_PY_LIB")
    if env:
        return Path(env)
    found = [ROOT / "target" / p / "libccgeo_py.so" for p in ("release", "debug")]
    found = [p for p in found if p.exists()]
    if not found:
        sys.exit("libccgeo_py.so not found; run `cargo build -p ccgeo-py` first")
    return max(found, key=lambda p: p.stat().st_mtime)


def load():
    tmp = tempfile.mkdtemp()
    shutil.copy(find_library(), Path(tmp) / "ccgeo_py.so")
    sys.path.insert(0, tmp)
    import ccgeo_py

    return ccgeo_py


def main():
    cg = load()
    assert "free33" in cg.catalog_names()

    free = cg.catalog("free33")
    assert free["dimension"] == 14 and free["all_exact_pass"]

    h = cg.Structure("heisenberg1")
    assert (h.n, h.k, h.degrees) == (3, 2, [1, 1, 2])
    b = h.bracket(1, 2, ["1/2", 0, 0])
    assert b["frame_coordinates"] == ["0", "0", "1"] and not b["in_distribution"]
    assert h.involutivity()["verdict"] == "non-involutive"
    assert h.hormander_step()["step"] == 2

    v6 = cg.Structure("free33_v6")
    r = v6.involutivity(h=3)
    assert r["verdict"] == "involutive-at-x" and r["residual"] <= 1e-10

    d = h.cc_distance([0, 0, 0], [1, 0, 0])
    assert 1.0 <= d["lower"] <= d["upper"] <= 1.001, d
    e = h.eta_distance([0, 0, 0], [0.1, 0, 0], 1.8, budget=3, restarts=2)
    assert e["lower"] <= e["upper"]

    cloud = h.contact_set("saddle", grid=21)
    assert len(cloud["contact"]) == 21

    dirs = [[math.cos(t), math.sin(t)] for t in (k * math.pi / 16 for k in range(32))]
    assert abs(cg.metric_jacobian_of(dirs, [1.0] * 32, 2) - 1.0) < 1e-12

    lat = cg.lattice_distance([0, 0, 0.05], 64)
    assert abs(lat["length"] - math.sqrt(4 * math.pi * 0.05)) < 0.1

    assert cg.run_criterion(9)["passed"]
    print("ccgeo_py smoke test passed")


if __name__ == "__main__":
    main()
