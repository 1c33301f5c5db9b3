"""Numba vs numpy timings of the hot kernels.

    python3 benchmarks/bench_kernels.py [--repeat 3]

Each kernel is run once per backend to warm up (numba compiles on first
call), then timed ``repeat`` times; the best time is reported together
with the largest difference between the two backends' outputs.
"""
import argparse
import time

import numpy as np

from corrzne import _kernels, rng
from corrzne.arma import preset
from corrzne.circuits import rb_circuit
from corrzne.quantum import basis_state, moment_unitaries, z_signs


def _best(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def cases():
    keys = rng.derive_keys(7, rng.NOISE, 0, np.arange(3000), np.arange(2)[:, None]).ravel()
    model = preset("pink", 1e-4)
    x = _kernels.stream_normals(keys[:64], 0, 4096, "numpy")
    ar, ma = np.asarray(model.ar), np.asarray(model.ma)

    def hist(n):
        return np.zeros((x.shape[0], n))

    circuit = rb_circuit(2, 2, 1)
    units = moment_unitaries(circuit)
    signs = z_signs(2)
    angles = 0.01 * _kernels.stream_normals(keys[:6000], 0, circuit.depth, "numpy")
    angles = angles.reshape(3000, 2, circuit.depth)
    states = np.broadcast_to(basis_state(2, 0), (3000, 4))
    return {
        "stream_normals (6000 x 512)":
            lambda b: _kernels.stream_normals(keys, 0, 512, b),
        "arma_filter (64 x 4096, pink)":
            lambda b: _kernels.arma_filter(ar, ma, hist(ar.size), hist(ma.size - 1), x, b)[0],
        f"evolve_dephased (3000 traj, depth {circuit.depth})":
            lambda b: _kernels.evolve_dephased(states, units, signs, angles, b),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    backends = ["numpy"] + (["numba"] if _kernels.HAVE_NUMBA else [])
    print(f"{'kernel':44s} " + " ".join(f"{b:>10s}" for b in backends) + "   speedup  max|diff|")
    for name, fn in cases().items():
        res = {b: _best(lambda b=b: fn(b), args.repeat) for b in backends}
        line = f"{name:44s} " + " ".join(f"{res[b][0] * 1e3:8.1f}ms" for b in backends)
        if len(backends) == 2:
            diff = np.max(np.abs(res["numba"][1] - res["numpy"][1]))
            line += f"   {res['numpy'][0] / res['numba'][0]:6.1f}x  {diff:.1e}"
        print(line)


if __name__ == "__main__":
    main()
