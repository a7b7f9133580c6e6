"""Writes the bundled example specs under specs/."""

import json
import math
from pathlib import Path

import numpy as np

OUT = Path(__file__).resolve().parent.parent / "specs"


def mat(m):
    m = np.asarray(m, dtype=complex)
    out = {"re": m.real.tolist()}
    if np.any(m.imag != 0):
        out["im"] = m.imag.tolist()
    return out


def pure(psi):
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def basis(d, k):
    v = np.zeros(d)
    v[k] = 1.0
    return pure(v)


def leaky_swap_unitary(theta):
    # index (a << 1) | s on the input, (b << 1) | e on the output
    cnot = np.zeros((4, 4), dtype=complex)
    for a in range(2):
        for s in range(2):
            cnot[((a ^ s) << 1) | s, (a << 1) | s] = 1.0
    mix = math.cos(theta) * np.eye(4, dtype=complex)
    for x in range(2):
        for y in range(2):
            mix[(y << 1) | x, (x << 1) | y] += -1j * math.sin(theta)
    return mix @ cnot


def leaky_swap(theta=0.4, p1=0.2):
    h = 1 / math.sqrt(2)
    a_states = [[1, 0], [0, 1], [h, h], [h, -h]]
    probs = [(1 - p1) / 2, (1 - p1) / 2, p1 / 2, p1 / 2]
    conds = [np.kron(pure(psi), basis(2, u // 2)) for u, psi in enumerate(a_states)]
    return {
        "version": 1,
        "kind": "quantum",
        "quantum": {
            "dims": {"a": 2, "s": 2, "b": 2, "e": 2},
            "kraus": [mat(leaky_swap_unitary(theta))],
            "innocent": mat(np.eye(2) / 2),
            "csi": {"marginal": mat(np.diag([1 - p1, p1]))},
            "ensemble": {"probs": probs, "conditionals": [mat(c) for c in conds]},
            "rates": {"r": 1.0, "r_k": 1.0, "r_j": 2.0},
            "alpha": 0.25,
        },
    }


def triangle(p1=0.3):
    # B receives A and E receives S, so I(U;S) = I(U;E) = 0 for U independent of S.
    rho_s = np.diag([1 - p1, p1])
    conds = [np.kron(basis(2, u), rho_s) for u in range(2)]
    return {
        "version": 1,
        "kind": "quantum",
        "quantum": {
            "dims": {"a": 2, "s": 2, "b": 2, "e": 2},
            "kraus": [mat(np.eye(4))],
            "innocent": mat(np.eye(2) / 2),
            "csi": {"marginal": mat(rho_s)},
            "ensemble": {"probs": [0.5, 0.5], "conditionals": [mat(c) for c in conds]},
            "rates": {"r": 0.5, "r_k": 0.25, "r_j": 1.0},
        },
    }


def non_cptp():
    spec = leaky_swap()
    spec["quantum"]["kraus"] = [mat(1.1 * leaky_swap_unitary(0.4))]
    return spec


def divergence_pairs():
    theta = 0.3
    rot = np.array([[math.cos(theta), -math.sin(theta), 0], [math.sin(theta), math.cos(theta), 0], [0, 0, 1]])
    rho = np.diag([0.5, 0.3, 0.2])
    sigma = np.diag([0.2, 0.3, 0.5])
    phase = np.array([[0.6, 0.2 - 0.1j], [0.2 + 0.1j, 0.4]])
    return {
        "version": 1,
        "kind": "quantum",
        "states": {
            "rho_diag": mat(rho),
            "sigma_diag": mat(sigma),
            "rho_rotated": mat(rot @ rho @ rot.T),
            "sigma_rotated": mat(rot @ sigma @ rot.T),
            "qubit_a": mat(phase),
            "qubit_b": mat(np.diag([0.7, 0.3])),
        },
    }


def redundant_symbol(q_s1=0.05, q=0.25, eps=0.01):
    def w_e(a, s, e):
        toward = lambda t: 1 - q if e == t else q
        return [0.5, toward(s), toward(1 - s)][a]

    def w_b(a, b):
        return 1 - eps if a == b else eps / 2

    w = [[[[w_b(a, b) * w_e(a, s, e) for e in range(2)] for b in range(3)] for s in range(2)] for a in range(3)]
    policy = {
        "p_u_given_s": [[1 / 3] * 3 for _ in range(2)],
        "p_a_given_us": [[[1.0 if a == u else 0.0 for a in range(3)] for _ in range(2)] for u in range(3)],
    }
    return {
        "version": 1,
        "kind": "classical",
        "classical": {
            "problem": {"q_s": [1 - q_s1, q_s1], "w": w, "x0": 0, "receiver_csi": True},
            "policy": policy,
            "rates": {"r": 0.5792, "r_k": 0.5792, "r_j": 0.151},
            "n": 6,
            "superposition": True,
        },
    }


def main():
    OUT.mkdir(exist_ok=True)
    specs = {
        "leaky_swap.json": leaky_swap(),
        "triangle.json": triangle(),
        "non_cptp.json": non_cptp(),
        "divergence_pairs.json": divergence_pairs(),
        "redundant_symbol.json": redundant_symbol(),
    }
    for name, spec in specs.items():
        (OUT / name).write_text(json.dumps(spec, indent=2) + "\n")


if __name__ == "__main__":
    main()
