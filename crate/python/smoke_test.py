#!/usr/bin/env python3
"""Smoke test for the gaplab_py extension module.

Builds are plain cargo cdylibs, so this script locates the shared library
under target/, stages it under the importable module name, and exercises
the bindings end to end:

    cargo build -p gaplab-py --release
    python3 python/smoke_test.py
"""

import json
import math
import shutil
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent


def stage_module() -> None:
    names = ["libgaplab_py.so", "libgaplab_py.dylib", "gaplab_py.dll"]
    candidates = [
        REPO / "target" / profile / name
        for profile in ("release", "debug")
        for name in names
    ]
    built = next((p for p in candidates if p.exists()), None)
    if built is None:
        sys.exit(
            "gaplab_py library not found; run `cargo build -p gaplab-py --release` first"
        )
    stage = Path(tempfile.mkdtemp(prefix="gaplab_py_"))
    suffix = ".pyd" if built.suffix == ".dll" else ".so"
    shutil.copy2(built, stage / f"gaplab_py{suffix}")
    sys.path.insert(0, str(stage))


def approx(a: float, b: float, rel: float) -> bool:
    return abs(a - b) <= rel * max(1.0, abs(b))


def main() -> None:
    stage_module()
    import gaplab_py as gl

    # Formula-level checks.
    assert approx(gl.theta(math.sqrt(2) / 2), math.pi / 4, 1e-12)
    assert gl.barrier_bound(0.0, 1.0) == 2.0
    assert approx(gl.universal_bound(2.0), 2.0, 1e-12)
    assert gl.theta_bound(1.0, 16.0, 2.0) > math.sqrt(2.0)
    try:
        gl.theta(5.0)
    except RuntimeError:
        pass
    else:
        sys.exit("theta(5.0) should have raised")
    print("formulas: OK")

    # Solve the truncated oscillator: gap ~ sqrt(2c) = 2.
    dom = gl.Domain.interval(-8.0, 8.0, 257)
    pot = gl.Potential.harmonic(2.0)
    s = gl.solve(dom, pot, "dirichlet")
    assert approx(s.gap, 2.0, 0.02), f"gap {s.gap}"
    assert approx(s.lambda1, 1.0, 0.02), f"lambda1 {s.lambda1}"
    assert len(s.u1) == len(s.coords) == 255
    assert min(s.u1) > 0.0, "ground state must be positive"
    assert not s.near_degenerate
    print(f"solve: OK ({s!r})")

    # Full pipeline through JSON.
    config = {
        "domain": {"kind": "interval", "bounds": [0.0, 1.0], "resolution": 257},
        "potential": {"family": "zero"},
        "bc": "dirichlet",
    }
    report = json.loads(gl.run_report(json.dumps(config)))
    assert report["status"] == "PASS", report["status"]
    gap = report["spectrum"]["gap"]
    assert approx(gap, 3.0 * math.pi**2, 1e-3), f"gap {gap}"
    names = {c["name"] for c in report["checks"]}
    assert "thm32_bound" in names and "identity_2_1" in names
    print(f"run_report: OK (gap {gap:.6f}, status {report['status']})")

    # A disk run exercises the polar path.
    disk = gl.Domain.disk(1.0, 12, 24)
    assert approx(disk.diameter(), 2.0, 1e-12)
    sd = gl.solve(disk, gl.Potential.zero(), "neumann")
    assert abs(sd.lambda1) < 1e-7, f"Neumann lambda1 {sd.lambda1}"
    print(f"disk solve: OK (lambda2 {sd.lambda2:.6f})")

    print("smoke test passed")


if __name__ == "__main__":
    main()
