#!/usr/bin/env python3
"""Time the numba-compiled kernels against the pure-numpy twin.

Runs the same hf3 integration (resonant sine pulse, interaction picture and
lab frame) in a fresh subprocess per backend so the import-time backend
selection applies, then prints a small table. The numba figure excludes
JIT compilation (one warm-up call per kernel signature).

    python bench/benchmark_backends.py [--duration-au 1e5] [--repeat 3]
"""

import argparse
import json
import os
import subprocess
import sys
import textwrap

DRIVER = textwrap.dedent("""
    import json, sys, time
    import rabichirp as rc
    from rabichirp.fixtures import fixture_path

    duration = float(sys.argv[1])
    repeat = int(sys.argv[2])

    sys_ = rc.load_system_file(fixture_path("hf3"))
    pair = rc.TransitionPair(0, 1)
    w = rc.transition_sign_and_freq(sys_, 1, 0)[1]
    spec = rc.make_pulse(1.73169e-3, "sine", duration, carrier=rc.FixedCarrier(w))
    opts = rc.IntegratorOptions(n_report=200)

    runs = {
        "interaction": lambda: rc.integrate(sys_, pair, spec, opts=opts),
        "schrodinger": lambda: rc.integrate_schrodinger_picture(sys_, pair, spec, opts=opts),
    }
    out = {"backend": rc.backend_name()}
    for name, fn in runs.items():
        fn()  # warm-up: JIT compile (numba) or nothing (numpy)
        best = float("inf")
        steps = 0
        for _ in range(repeat):
            t0 = time.perf_counter()
            traj = fn()
            best = min(best, time.perf_counter() - t0)
            steps = traj.stats.steps
        out[name] = {"seconds": best, "steps": steps}
    print(json.dumps(out))
""")


def run_backend(backend: str, duration: float, repeat: int) -> dict:
    env = dict(os.environ, RABICHIRP_BACKEND=backend)
    res = subprocess.run([sys.executable, "-c", DRIVER, str(duration), str(repeat)],
                         env=env, capture_output=True, text=True)
    if res.returncode != 0:
        raise RuntimeError(f"{backend} run failed:\n{res.stderr}")
    return json.loads(res.stdout)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--duration-au", type=float, default=1e5,
                    help="pulse length; ~2e4 integrator steps per 1e5 a.u.")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    results = {b: run_backend(b, args.duration_au, args.repeat)
               for b in ("numba", "numpy")}

    print(f"{'run':<14} {'backend':<8} {'steps':>10} {'time (s)':>10} {'steps/s':>12}")
    for run in ("interaction", "schrodinger"):
        for backend in ("numba", "numpy"):
            r = results[backend][run]
            rate = r["steps"] / r["seconds"]
            print(f"{run:<14} {backend:<8} {r['steps']:>10} {r['seconds']:>10.3f} {rate:>12.0f}")
        speedup = results["numpy"][run]["seconds"] / results["numba"][run]["seconds"]
        print(f"{'':<14} numba speedup: {speedup:.0f}x")


if __name__ == "__main__":
    main()
