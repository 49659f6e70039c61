#!/usr/bin/env python3
"""Smoke test for the adiatherm_py extension module.

Builds nothing itself: expects `cargo build -p adiatherm-py` (or `--release`)
to have produced the cdylib, loads it straight from the target directory, and
exercises one small end-to-end slice of the physics.
"""

import importlib.machinery
import importlib.util
import math
import sys
from pathlib import Path


def load_module():
    root = Path(__file__).resolve().parent.parent
    candidates = [
        root / "target" / profile / name
        for profile in ("release", "debug")
        for name in ("libadiatherm_py.so", "adiatherm_py.so", "libadiatherm_py.dylib")
    ]
    for path in candidates:
        if path.exists():
            loader = importlib.machinery.ExtensionFileLoader("adiatherm_py", str(path))
            spec = importlib.util.spec_from_loader("adiatherm_py", loader)
            module = importlib.util.module_from_spec(spec)
            loader.exec_module(module)
            print(f"loaded {path}")
            return module
    sys.exit("no adiatherm_py cdylib found; run `cargo build -p adiatherm-py` first")


def main():
    at = load_module()

    params = at.PhysicalParams(2, 6.0)
    assert params.num_levels == 3, params.num_levels
    assert params.model == "linear"
    schedule = at.Schedule(lambda0_khz=5.0, delta0_khz=22.0, gamma_khz=2.4)
    assert abs(schedule.t_max_us - 1e6 / (2 * 2.4e3)) < 1e-6

    # drive endpoints: coupling fully off, detuning at +/- delta0
    d_lo, l_lo = schedule.eval(-schedule.t_max_us)
    d_hi, l_hi = schedule.eval(schedule.t_max_us)
    assert abs(d_lo + 22.0) < 1e-9 and abs(d_hi - 22.0) < 1e-9
    assert abs(l_lo) < 1e-9 and abs(l_hi) < 1e-9

    dist = at.MotionDistribution.thermal(1.0, 1e-8).extended(6)
    response = at.dicke_response(params, schedule, dist.n_max)
    for s in response.column_sums():
        assert abs(s - 1.0) < 1e-9, s

    # slow sweep: population transfer close to the ideal saturating map
    fidelity = at.transfer_fidelity(response, dist)
    assert fidelity > 0.97, fidelity

    pops = at.final_dicke_populations(response, dist)
    assert abs(sum(pops) - 1.0) < 1e-9
    mean = at.expected_sz(2, pops)
    var = at.variance_sz(2, pops)
    o_mean, o_var = at.perfect_transfer_moments(2, dist)
    assert abs(mean - o_mean) < 0.05, (mean, o_mean)
    assert abs(var - o_var) < 0.1, (var, o_var)

    # measured information never beats the quantum bound
    cfi = at.thermal_cfi(response, dist, 1.0)
    qfi = at.qfi_thermal(1.0)
    assert 0.0 < cfi <= qfi * (1.0 + 1e-9), (cfi, qfi)

    # closed-form check of the bound: x^2 e^-x / (1 - e^-x)^2 at nbar = 1
    x = math.log(2.0)
    expected_qfi = x * x * 0.5 / (0.5 * 0.5)
    assert abs(qfi - expected_qfi) < 1e-12

    gap_khz, ok, used_formula = at.validate_addressability(12, 8.0, 5.0, 15.0)
    assert used_formula and ok
    assert 147.0 <= gap_khz <= 149.0, gap_khz

    # spectrum endpoints are the bare Dicke splittings
    spec = at.instantaneous_spectrum(params, schedule, 1, [-schedule.t_max_us])
    assert abs(spec[0][-1] - 22.0) < 1e-9, spec[0]

    # errors surface as ValueError
    try:
        at.PhysicalParams(0, 6.0)
    except ValueError:
        pass
    else:
        raise AssertionError("num_ions = 0 should be rejected")

    print("smoke test passed: fidelity %.4f, F_C/F_Q %.4f, gap %.3f kHz" % (
        fidelity, cfi / qfi, gap_khz))


if __name__ == "__main__":
    main()
