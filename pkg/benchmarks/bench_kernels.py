"""Time the numba and numpy backends of the RK4 kernels and check they agree.

    python3 benchmarks/bench_kernels.py [--steps 500000] [--fock-n 60] [--fock-steps 2000]
"""

import argparse
import time

import numpy as np

from oscdeco import kernels
from oscdeco.evolution import moment_coefficients
from oscdeco.fock import build_basis, factored_generator, project_initial_state
from oscdeco.model import InitialStateSpec, OscillatorParams, ThermalBath, initial_covariance, thermal_coefficients


def best_of(fn, repeat):
    best, out = np.inf, None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench(name, make_call, repeat):
    results = {}
    for backend in kernels.BACKENDS:
        call = make_call(backend)
        call()  # warm-up (jit compile / cache load)
        results[backend] = best_of(call, repeat)
    t_nb, y_nb = results["numba"]
    t_np, y_np = results["numpy"]
    diff = np.max(np.abs(y_nb - y_np)) / max(np.max(np.abs(y_np)), 1e-300)
    print(f"{name:<28} numba {t_nb * 1e3:9.2f} ms   numpy {t_np * 1e3:9.2f} ms   "
          f"speedup {t_np / t_nb:6.1f}x   max rel diff {diff:.2e}")
    return diff


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--steps", type=int, default=500_000)
    ap.add_argument("--fock-n", type=int, default=60)
    ap.add_argument("--fock-steps", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    params = OscillatorParams()
    bath = ThermalBath.from_coth(1.5)
    coeffs = thermal_coefficients(params, bath)
    spec = InitialStateSpec(delta=2.0, r=0.3, q0=1.0, p0=-0.5)
    y0 = initial_covariance(spec, params).as_vector()
    k = moment_coefficients(params, coeffs)
    dt = 1e-3

    worst = bench(
        f"moments ({args.steps} steps)",
        lambda b: (lambda: kernels.rk4_moments(y0, k, dt, args.steps, stride=100, backend=b)),
        args.repeat,
    )

    basis = build_basis(params, args.fock_n)
    gen = factored_generator(basis, params, coeffs)
    rho0 = project_initial_state(spec, params, basis).values
    worst = max(worst, bench(
        f"fock N={args.fock_n} ({args.fock_steps} steps)",
        lambda b: (lambda: kernels.rk4_lindblad(rho0, gen, dt, args.fock_steps, backend=b)),
        args.repeat,
    ))

    ok = worst < 1e-10
    print(f"backends agree: {'yes' if ok else 'NO'}")
    raise SystemExit(0 if ok else 1)


if __name__ == "__main__":
    main()
