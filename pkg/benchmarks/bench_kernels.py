"""Time each hot kernel under the numba and numpy backends.

    python benchmarks/bench_kernels.py [--repeat 5] [--qubits 10]

Numba timings exclude the first (compiling) call.
"""
import argparse
import importlib
import timeit

import numpy as np

from nmrqsim._kernels import numpy_impl
from nmrqsim.simulator import Circuit, NoiseModel, _draw_noise


def _circuit(rng, n, length):
    c = Circuit(n)
    for _ in range(length):
        if rng.random() < 0.4:
            a, b = rng.choice(n, 2, replace=False)
            c.add("CNOT" if rng.random() < 0.5 else "CPhase", int(a), int(b), angle=0.3)
        else:
            c.add("Ry", int(rng.integers(n)), angle=float(rng.uniform(-3, 3)))
    return c.compile()


def cases(n_qubits: int):
    rng = np.random.default_rng(0)
    cc = _circuit(rng, n_qubits, 200)
    state = np.zeros((1, 1 << n_qubits), dtype=complex)
    state[0, 0] = 1
    noisy_n, batch = 4, 2048
    ncc = _circuit(rng, noisy_n, 60)
    paulis = NoiseModel().pauli_matrices()
    err_u, qsel, psel = _draw_noise(rng, ncc.codes.size, batch, 3)
    noisy_states = np.zeros((batch, 1 << noisy_n), dtype=complex)
    noisy_states[:, 0] = 1
    sym = rng.normal(size=(32, 32))
    sym = sym + sym.T
    mat = rng.normal(size=(64, 64)).astype(complex)
    fid = rng.normal(size=4096) + 0j

    return {
        f"run_gates ({n_qubits}q, 200 gates)":
            lambda k: k.run_gates(state.copy(), cc.codes, cc.qubits, cc.mats, cc.angles,
                                  n_qubits),
        f"run_noisy ({noisy_n}q, {batch} trajectories)":
            lambda k: k.run_noisy(noisy_states.copy(), ncc.codes, ncc.qubits, ncc.mats,
                                  ncc.angles, noisy_n, err_u, qsel, psel, 0.05, 0.1, paulis),
        "jacobi_eigh (32x32)": lambda k: k.jacobi_eigh(sym, 1e-12, 100),
        "lu_logdet (64x64)": lambda k: k.lu_logdet(mat),
        "dft (4096 points)": lambda k: k.dft(fid),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--qubits", type=int, default=10)
    args = ap.parse_args()
    backends = {"numpy": numpy_impl}
    try:
        backends["numba"] = importlib.import_module("nmrqsim._kernels.numba_impl")
    except ImportError:
        print("numba not installed; timing numpy only")
    print(f"{'kernel':40s}" + "".join(f"{b:>12s}" for b in backends) + "     speedup")
    for name, fn in cases(args.qubits).items():
        times = {}
        for b, mod in backends.items():
            fn(mod)  # warm-up (numba compiles here)
            times[b] = min(timeit.repeat(lambda: fn(mod), number=1, repeat=args.repeat))
        row = f"{name:40s}" + "".join(f"{times[b] * 1e3:10.2f}ms" for b in backends)
        if "numba" in times:
            row += f"  {times['numpy'] / times['numba']:9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
