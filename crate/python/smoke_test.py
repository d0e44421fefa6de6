"""Smoke test for the pylatrefine extension module.

Build it first:

    cargo build --release -p latrefine-py --features extension-module

then run `python3 python/smoke_test.py`. The script finds the built library
under target/, or in the directory named by $PYLATREFINE_LIB.
"""

import importlib.util
import os
import shutil
import sys
import tempfile
from fractions import Fraction
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def load():
    dirs = [os.environ.get("PYLATREFINE_LIB")] if os.environ.get("PYLATREFINE_LIB") else []
    dirs += [ROOT / "target" / "release", ROOT / "target" / "debug"]
    for d in dirs:
        lib = Path(d) / "libpylatrefine.so"
        if lib.exists():
            tmp = Path(tempfile.mkdtemp()) / "pylatrefine.so"
            shutil.copy(lib, tmp)
            spec = importlib.util.spec_from_file_location("pylatrefine", tmp)
            mod = importlib.util.module_from_spec(spec)
            spec.loader.exec_module(mod)
            return mod
    sys.exit("libpylatrefine.so not found; build the latrefine-py crate first")


def main():
    lr = load()

    plan = lr.Plan("L0,L1,L2W")
    assert str(plan) == "L0,L1,L2W" and plan.slug == "L0-L1-L2W"
    assert plan.classes() == ["GAMMA", "BODY", "W"]
    assert len(plan.sites()) == 14
    assert ("W", (Fraction(0), Fraction(1, 4), Fraction(1, 2))) in plan.sites()

    w = lr.cell(plan, "W")
    assert w.volume() == Fraction(451, 6912)
    fv = w.f_vector()
    assert (fv["V"], fv["E"], fv["F"]) == (12, 18, 8) and fv["faces"] == {3: 4, 6: 4}
    w.validate()
    assert w.contains((0, Fraction(1, 4), Fraction(1, 2)))

    table = lr.volumes(plan)
    assert sum(m * v for m, v in table.values()) == 1

    l3 = lr.Plan("L0,L1,L2W,L3")
    lam = lr.cell(l3, "LAMBDA")
    assert lam.volume() == Fraction(26291, 884736)
    assert (Fraction(95, 288), Fraction(13, 144), Fraction(95, 288)) in lam.vertices()
    other = lr.cell(l3, "LAMBDA", (Fraction(7, 24),) * 3)
    assert other.volume() == lam.volume()

    assert lr.shells(lr.Plan("L0"), "GAMMA", 6) == [(Fraction(k), n) for k, n in
                                                     zip(range(1, 7), [6, 12, 8, 6, 24, 24])]
    assert lr.insertion_gap(l3, "LAMBDA") == Fraction(25, 192)

    est, se = lr.montecarlo(lr.Plan("L0,L1"), "GAMMA", 200_000, 5)
    assert abs(est - 0.5) <= 4 * se

    ok, text, _ = lr.verify()
    assert ok, text

    with tempfile.TemporaryDirectory() as d:
        stl = Path(d) / "oct.stl"
        lr.write_mesh([lr.cell(l3, "GAMMA")], str(stl))
        assert stl.stat().st_size == 484
        off = Path(d) / "bridge.off"
        lr.write_mesh(lr.figure_cells("level3-bridge"), str(off))
        assert off.read_text().startswith("OFF\n")

    try:
        lr.Plan("L0,L2W")
    except ValueError:
        pass
    else:
        raise AssertionError("invalid plan accepted")

    print("smoke test passed")


if __name__ == "__main__":
    main()
