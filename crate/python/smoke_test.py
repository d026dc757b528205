#!/usr/bin/env python3
"""Smoke test for the Python bindings.

Builds nothing itself: expects `cargo build -p lightwork-py` (debug or
release) to have produced target/<profile>/liblightwork_py.so. Copies the
newest one to a temp dir under the importable name and checks a handful of
known values end to end.

Run from the repository root:  python3 python/smoke_test.py
"""

import math
import shutil
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def load_module():
    candidates = [
        ROOT / "target" / profile / "liblightwork_py.so"
        for profile in ("release", "debug")
    ]
    built = [p for p in candidates if p.exists()]
    if not built:
        sys.exit(
            "liblightwork_py.so not found; run `cargo build -p lightwork-py` first"
        )
    newest = max(built, key=lambda p: p.stat().st_mtime)
    stage = Path(tempfile.mkdtemp(prefix="lightwork-py-"))
    shutil.copy2(newest, stage / "lightwork.so")
    sys.path.insert(0, str(stage))
    import lightwork

    return lightwork


def approx(a, b, tol=1e-9):
    assert abs(a - b) <= tol, f"{a!r} != {b!r} (tol {tol})"


def main():
    lw = load_module()

    # occupation/temperature bookkeeping
    approx(lw.entropy(0.0), 0.0)
    approx(lw.temperature(1.0, 1.0), 1.0 / math.log(2.0), 1e-12)
    assert lw.free_energy(2.0, 1.0) < 0.0

    # reversible two-mode extraction
    rev = lw.reversible_extract(2, 20.0, 1.0)
    assert 10.9 < rev["work"] < 11.1, rev
    approx(rev["efficiency"], rev["work"] / 20.0, 1e-12)

    # photocount tap
    w_pc = lw.photocount_work(20.0, 0.9)
    assert 0.0 < w_pc < 20.0
    cond = lw.conditional_distribution(20.0, 0.9, 5)
    approx(sum(cond), 1.0, 1e-9)
    assert min(cond) >= 0.0
    approx(lw.g2_zero(1), 1.5, 1e-12)
    assert lw.photocount_information(20.0, 0.9) > 0.0

    # homodyne optimum is self-consistent and beats the sign record
    opt = lw.homodyne_optimize(100.0)
    approx(lw.homodyne_work(100.0, opt["xi"], opt["epsilon"]), opt["w_max"], 1e-9)
    assert opt["w_max"] > 60.0
    sopt = lw.sign_optimize(100.0)
    assert 0.0 < sopt["w_max"] < opt["w_max"]

    # the sign record keeps exactly 1/(2 pi) of the displaced work
    q = lw.sign_work(100.0, opt["xi"], opt["epsilon"])
    fine = lw.homodyne_displacement_work(100.0, opt["xi"], opt["epsilon"])
    approx(q["total_gross"] / fine, 1.0 / (2.0 * math.pi), 1e-12)

    # coarse record approaches the fine limit as the resolution shrinks
    coarse = lw.coarse_work(100.0, opt["xi"], opt["epsilon"], 1e-3)
    approx(coarse, opt["w_max"], 1e-3 * abs(opt["w_max"]))

    # erasure: reset ledger identity and break-even occupation
    reset = lw.optimal_reset(2.0, 1.0, 0.4)
    approx(reset["q_d"], 4.0 * 2.0 + reset["w_r"], 1e-9)
    approx(lw.reset_breakeven(1.0, 1.0), 1.8442990383413105, 1e-9)
    ratio = lw.erasure_bound("photocount-small", 1e6) / lw.erasure_bound("entire", 1e6)
    assert ratio >= 1.8, ratio

    # ergotropy: thermal states are passive, pure coherence is not
    h = lw.HamiltonianSpectrum([0.0, 1.0])
    thermal = lw.DensityMatrix.thermal(h, 0.7)
    approx(lw.ergotropy(thermal, h), 0.0, 1e-12)
    plus = lw.DensityMatrix([[0.5, 0.5], [0.5, 0.5]])
    approx(lw.ergotropy(plus, h), 0.5, 1e-10)
    passive = lw.passive_populations(plus, h)
    assert passive[0] >= passive[1]

    # measurement-driven qubit cycle in the sigma_x basis
    h_i = lw.HamiltonianSpectrum([0.0, 0.5])
    h_f = lw.HamiltonianSpectrum([0.0, 1.2])
    p_eq = lw.DensityMatrix.thermal(h_i, 1.0).diagonal_populations()
    kraus = lw.KrausSet(
        [
            ([[0.5, 0.5], [0.5, 0.5]], None),
            ([[0.5, -0.5], [-0.5, 0.5]], None),
        ]
    )
    cycle = lw.nsm_cycle(h_i, h_f, p_eq, kraus, 0.3, 1.0)
    approx(cycle["eta"], 1.0 - 0.5 / 1.2, 1e-12)
    assert cycle["q_m"] > 0.0
    assert not cycle["theta_prime_finite"]

    # seeded Monte Carlo: deterministic, worker-count independent, and
    # consistent with the closed form
    xi, eps = 2.0, 0.2
    est_a = lw.estimate_work_homodyne(20.0, xi, eps, 50_000, 7, 1)
    est_b = lw.estimate_work_homodyne(20.0, xi, eps, 50_000, 7, 3)
    assert est_a == est_b, (est_a, est_b)
    closed = lw.homodyne_work(20.0, xi, eps)
    z = (est_a["mean"] - closed) / est_a["std_error"]
    assert abs(z) < 4.5, (est_a, closed, z)

    mi = lw.estimate_information_photocount(5.0, 0.8, 50_000, 11, 2)
    ref = lw.photocount_information(5.0, 0.8)
    assert abs(mi["mean"] - ref) < 5.0 * mi["std_error"] + mi["bias_bound"], (mi, ref)

    print("smoke test passed")


if __name__ == "__main__":
    main()
