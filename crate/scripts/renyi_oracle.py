"""Reference values for the divergence tests, computed with mpmath and scipy.

Diagonal pairs use the classical Rényi formula at 50 digits. The non-commuting
qubit pair uses scipy's matrix functions for the sandwiched definition.
"""

import json
import sys
from pathlib import Path

import mpmath as mp
import numpy as np
from scipy.linalg import fractional_matrix_power, logm

mp.mp.dps = 50


def classical_renyi(p, q, order):
    s = mp.fsum(mp.mpf(x) ** order * mp.mpf(y) ** (1 - order) for x, y in zip(p, q))
    return mp.log(s, 2) / (order - 1)


def sandwiched(rho, sigma, order):
    g = fractional_matrix_power(sigma, (1 - order) / (2 * order))
    inner = fractional_matrix_power(g @ rho @ g, order)
    return float(np.log2(np.trace(inner).real) / (order - 1))


def relative_entropy(rho, sigma):
    return float(np.trace(rho @ (logm(rho) - logm(sigma))).real / np.log(2))


def load(spec, name):
    m = spec["states"][name]
    return np.array(m["re"]) + 1j * np.array(m.get("im", np.zeros_like(m["re"])))


def main():
    spec = json.loads(Path(sys.argv[1]).read_text())
    p = np.diag(load(spec, "rho_diag")).real
    q = np.diag(load(spec, "sigma_diag")).real
    a, b = load(spec, "qubit_a"), load(spec, "qubit_b")
    print("diag order 1.25:", mp.nstr(classical_renyi(p, q, mp.mpf("1.25")), 20))
    print("qubit order 1.25:", repr(sandwiched(a, b, 1.25)))
    print("qubit order 2:", repr(sandwiched(a, b, 2.0)))
    print("qubit relative entropy:", repr(relative_entropy(a, b)))


if __name__ == "__main__":
    main()
