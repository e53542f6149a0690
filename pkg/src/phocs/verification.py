"""Stabilizer regressions for the source and fusion constructions.

Each check rebuilds a small circuit step by step and compares the resulting
stabilizer group against a frozen target (group equality, not row order).
The targets are the known intermediate groups of the three-photon linear
cluster emitted by a quantum-dot source, the Bell-pair fusion sequence that
completes a cluster link through a Y measurement, the relative-GHZ property
of Hadamard-free emission, and the locality of dot errors in the emitted
photon stream.
"""

from dataclasses import dataclass, field

import numpy as np

from .stabsim import PauliOperator, Tableau, inject_and_propagate

DOT = "dot"

# five steps of the three-photon emission sequence on (dot, p1, p2, p3):
# each of steps 1-3 is a precession Hadamard plus an emission CNOT, step 4
# is the final Hadamard alone, step 5 measures the dot out (outcome forced
# even) leaving the three-photon linear cluster
EMISSION_STEP_TARGETS = [
    ["ZIII", "IZII", "IIZI", "IIIZ"],
    ["XXII", "ZZII", "IIZI", "IIIZ"],
    ["ZXII", "XZXI", "ZIZI", "IIIZ"],
    ["XXIX", "ZZXI", "XIZX", "ZIIZ"],
    ["ZXIX", "XZXI", "ZIZX", "XIIZ"],
]
EMISSION_FINAL_TARGET = ["XZI", "ZXZ", "IZX"]

# Bell pairs on (1,2) and (3,4); photons 2,3 are pushed out by Hadamards and
# fused (success, even parity, even X outcome), leaving a three-qubit linear
# cluster on (1,2,4); measuring the middle photon in Y (even outcome)
# completes the 1-4 link up to the phase-type byproduct
FUSION_MID_TARGET = ["XZI", "ZXZ", "IZX"]  # on labels (1, 2, 4)
FUSION_FINAL_TARGET = ["YZ", "ZY"]         # on labels (1, 4)


@dataclass
class CheckResult:
    name: str
    passed: bool
    lines: list = field(default_factory=list)


def _matrix_lines(tableau):
    return [" ".join(s[1:]) + ("  (" + s[0] + ")" if s[0] != "+" else "")
            for s in tableau.to_strings()]


def _target_tableau(strings, labels):
    gens = [PauliOperator.from_string(s, labels) for s in strings]
    x = np.stack([g.x for g in gens])
    z = np.stack([g.z for g in gens])
    r = np.array([g.r for g in gens], dtype=np.uint8)
    return Tableau(x, z, r, labels)


def check_emission_sequence():
    """Three-photon linear-cluster emission, step by step."""
    labels = [DOT, "p1", "p2", "p3"]
    res = CheckResult("emission-sequence", True)
    t = Tableau.computational(1, labels=[DOT])
    for p in ("p1", "p2", "p3"):
        t.add_qubit(p)
    steps = [
        lambda: None,
        lambda: (t.apply_clifford("H", (DOT,)),
                 t.apply_clifford("CNOT", (DOT, "p1"))),
        lambda: (t.apply_clifford("H", (DOT,)),
                 t.apply_clifford("CNOT", (DOT, "p2"))),
        lambda: (t.apply_clifford("H", (DOT,)),
                 t.apply_clifford("CNOT", (DOT, "p3"))),
        lambda: t.apply_clifford("H", (DOT,)),
    ]
    for i, action in enumerate(steps):
        action()
        target = _target_tableau(EMISSION_STEP_TARGETS[i], tuple(labels))
        ok = t.groups_equal(target)
        res.lines.append(f"step {i}:")
        res.lines.extend("  " + l for l in _matrix_lines(t))
        if not ok:
            res.passed = False
            res.lines.append("  MISMATCH, expected group:")
            res.lines.extend("    " + l for l in _matrix_lines(target))
            return res
    t.measure_out(DOT, "Z", forced_outcome=0)
    target = _target_tableau(EMISSION_FINAL_TARGET, ("p1", "p2", "p3"))
    res.lines.append("dot measured out:")
    res.lines.extend("  " + l for l in _matrix_lines(t))
    if t.groups_equal(target):
        res.lines.append("  = linear-cluster group:")
        res.lines.extend("    " + l for l in _matrix_lines(target))
    else:
        res.passed = False
        res.lines.append("  MISMATCH, expected group:")
        res.lines.extend("    " + l for l in _matrix_lines(target))
    return res


def check_fusion_sequence():
    """Bell-pair fusion completing a cluster link through a Y measurement."""
    res = CheckResult("fusion-link", True)
    t = Tableau.computational(4, labels=[1, 2, 3, 4])
    # prepare two Bell pairs
    t.apply_clifford("H", (1,))
    t.apply_clifford("CNOT", (1, 2))
    t.apply_clifford("H", (3,))
    t.apply_clifford("CNOT", (3, 4))
    # push out the fusion photons, then the parity projection
    t.apply_clifford("H", (2,))
    t.apply_clifford("H", (3,))
    t.fusion_type_I(2, 3, success=True, parity=0, forced_x_outcome=0)
    res.lines.append("after fusion of photons 2,3 (labels 1,2,4):")
    res.lines.extend("  " + l for l in _matrix_lines(t))
    target_mid = _target_tableau(FUSION_MID_TARGET, (1, 2, 4))
    if not t.groups_equal(target_mid):
        res.passed = False
        res.lines.append("  MISMATCH, expected group:")
        res.lines.extend("    " + l for l in _matrix_lines(target_mid))
        return res
    t.measure_out(2, "Y", forced_outcome=0)
    res.lines.append("middle photon measured in Y (labels 1,4):")
    res.lines.extend("  " + l for l in _matrix_lines(t))
    target = _target_tableau(FUSION_FINAL_TARGET, (1, 4))
    if t.groups_equal(target):
        res.lines.append("  = completed-link group:")
        res.lines.extend("    " + l for l in _matrix_lines(target))
    else:
        res.passed = False
        res.lines.append("  MISMATCH, expected group:")
        res.lines.extend("    " + l for l in _matrix_lines(target))
    return res


def check_re_block_is_relative_ghz():
    """Hadamard-free emissions leave the photons Z-correlated."""
    res = CheckResult("re-block-ghz", True)
    t = Tableau.computational(1, labels=[DOT])
    t.machine_gun_emit(DOT, "p1", with_hadamard=False)
    t.machine_gun_emit(DOT, "p2", with_hadamard=False)
    zz = PauliOperator.from_string("IZZ", (DOT, "p1", "p2"))
    res.lines.append("two Hadamard-free emissions:")
    res.lines.extend("  " + l for l in _matrix_lines(t))
    if not t.contains(zz):
        res.passed = False
        res.lines.append("  MISMATCH: Z p1 Z p2 not in the group")
    return res


def dot_error_locality_cases(n_photons=4):
    """All single-Pauli dot errors at every inter-emission point.

    Returns (pauli, position, equivalent_weight) tuples where
    equivalent_weight is the smallest photon weight of the propagated error
    modulo the final stabilizer group and modulo any operator on the dot.
    Dot operators are free because the dot is measured out and its outcome
    consumed classically: a Z there is gone after the measurement and an X
    only flips the recorded bit, which the byproduct tracking folds into
    the photons.
    """
    labels = [DOT] + [f"p{i}" for i in range(1, n_photons + 1)]
    circuit = []
    for i in range(1, n_photons + 1):
        circuit.append(("H", (DOT,)))
        circuit.append(("CNOT", (DOT, f"p{i}")))
    circuit.append(("H", (DOT,)))

    t = Tableau.computational(1, labels=[DOT])
    for i in range(1, n_photons + 1):
        t.machine_gun_emit(DOT, f"p{i}", with_hadamard=True)
    t.apply_clifford("H", (DOT,))

    n = len(labels)
    cases = []
    for pos_block in range(1, n_photons):
        position = 2 * pos_block  # right after emission block pos_block
        for pauli in "XYZ":
            err = PauliOperator.single(n, 0, pauli, tuple(labels))
            out = inject_and_propagate(circuit, err, position, labels)
            best = None
            for d in "IXYZ":
                base = out if d == "I" else \
                    out * PauliOperator.single(n, 0, d, tuple(labels))
                for q in range(1, n):  # photon columns
                    for p2 in "IXYZ":
                        cand = base if p2 == "I" else base * \
                            PauliOperator.single(n, q, p2, tuple(labels))
                        if t.contains(cand, up_to_phase=True):
                            w = 0 if p2 == "I" else 1
                            if best is None or w < best:
                                best = w
            cases.append((pauli, pos_block, best))
    return cases


def check_dot_error_locality(n_photons=4):
    res = CheckResult("dot-error-locality", True)
    for pauli, block, weight in dot_error_locality_cases(n_photons):
        ok = weight is not None and weight <= 1
        res.lines.append(
            f"{pauli} on dot after emission {block}: equivalent photon "
            f"weight {weight}")
        if not ok:
            res.passed = False
    return res


def run_all_checks():
    return [
        check_emission_sequence(),
        check_fusion_sequence(),
        check_re_block_is_relative_ghz(),
        check_dot_error_locality(),
    ]
