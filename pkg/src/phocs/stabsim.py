"""Exact stabilizer-tableau engine for small photonic circuits.

Verifies the quantum-dot emission sequence and the fusion gate at the level
of stabilizer groups: a state on n qubits is stored as n independent,
mutually commuting generators with tracked signs, and every public mutation
re-checks those invariants (the circuits involved are tiny, so this costs
nothing).

Internally a Pauli is kept in X/Z binary form with a phase exponent r, as

    operator = i^r * X^x1 Z^z1 (x) X^x2 Z^z2 (x) ...

so Y on one qubit is (x=1, z=1, r += 1). Hermitian operators have r equal to
the Y-count mod 2. Qubits carry stable external labels that survive removal,
since fusion repeatedly consumes photons.
"""

from dataclasses import dataclass

import numpy as np

_PAULI_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_BITS_PAULI = {v: k for k, v in _PAULI_BITS.items()}


@dataclass
class PauliOperator:
    """A signed Pauli string over an ordered set of qubits.

    `labels` is optional; when present, tableau operations align qubits by
    label instead of by position.
    """

    x: np.ndarray
    z: np.ndarray
    r: int = 0  # phase exponent: operator = i^r * X^x Z^z
    labels: tuple = None

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=bool)
        self.z = np.asarray(self.z, dtype=bool)
        if self.x.shape != self.z.shape:
            raise ValueError("x and z masks must have equal length")
        self.r = int(self.r) % 4
        if self.labels is not None:
            self.labels = tuple(self.labels)
            if len(self.labels) != len(self.x):
                raise ValueError("labels must match mask length")

    @classmethod
    def from_string(cls, s, labels=None):
        """Parse e.g. 'XZI', '-Y', '+iXY'."""
        s = s.strip()
        r = 0
        if s.startswith(("+", "-")):
            sign = -1 if s[0] == "-" else 1
            s = s[1:]
            if s.startswith("i"):
                r = 1
                s = s[1:]
            if sign < 0:
                r += 2
        chars = [c for c in s if not c.isspace()]
        x = np.zeros(len(chars), dtype=bool)
        z = np.zeros(len(chars), dtype=bool)
        n_y = 0
        for q, c in enumerate(chars):
            if c not in _PAULI_BITS:
                raise ValueError(f"unknown Pauli letter {c!r}")
            x[q], z[q] = _PAULI_BITS[c]
            n_y += c == "Y"
        return cls(x, z, (r + n_y) % 4, labels)

    @classmethod
    def single(cls, n, q, pauli, labels=None):
        """Weight-1 Pauli `pauli` on position q of n qubits."""
        x = np.zeros(n, dtype=bool)
        z = np.zeros(n, dtype=bool)
        x[q], z[q] = _PAULI_BITS[pauli]
        return cls(x, z, 1 if pauli == "Y" else 0, labels)

    @property
    def n(self):
        return len(self.x)

    @property
    def n_y(self):
        return int(np.count_nonzero(self.x & self.z))

    @property
    def phase(self):
        """Scalar prefactor of the conventional Pauli-string form."""
        return 1j ** ((self.r - self.n_y) % 4)

    def is_hermitian(self):
        return (self.r - self.n_y) % 2 == 0

    def is_identity(self):
        return not (self.x.any() or self.z.any())

    def weight(self):
        return int(np.count_nonzero(self.x | self.z))

    def commutes_with(self, other):
        s = np.count_nonzero(self.x & other.z) + \
            np.count_nonzero(self.z & other.x)
        return s % 2 == 0

    def __mul__(self, other):
        r = (self.r + other.r + 2 * np.count_nonzero(self.z & other.x)) % 4
        return PauliOperator(self.x ^ other.x, self.z ^ other.z, r,
                             self.labels)

    def __neg__(self):
        return PauliOperator(self.x.copy(), self.z.copy(), self.r + 2,
                             self.labels)

    def __eq__(self, other):
        if not isinstance(other, PauliOperator):
            return NotImplemented
        return (np.array_equal(self.x, other.x)
                and np.array_equal(self.z, other.z)
                and self.r == other.r)

    def equal_masks(self, other):
        return (np.array_equal(self.x, other.x)
                and np.array_equal(self.z, other.z))

    def __str__(self):
        sign = {0: "+", 1: "+i", 2: "-", 3: "-i"}[(self.r - self.n_y) % 4]
        body = "".join(_BITS_PAULI[(int(a), int(b))]
                       for a, b in zip(self.x, self.z))
        return sign + body


@dataclass
class MeasurementRecord:
    measured_operator: PauliOperator
    outcome: int
    deterministic: bool


class Tableau:
    """Pure stabilizer state: n generators over n labelled qubits."""

    def __init__(self, x, z, r, labels):
        self.x = np.asarray(x, dtype=bool)
        self.z = np.asarray(z, dtype=bool)
        self.r = np.asarray(r, dtype=np.uint8) % 4
        self.labels = list(labels)
        self.check_invariants()

    # ---- construction ------------------------------------------------------

    @classmethod
    def computational(cls, n, labels=None):
        """|0...0> on n qubits: generators Z_1 .. Z_n."""
        if n < 1:
            raise ValueError(f"need at least one qubit, got {n}")
        if labels is None:
            labels = list(range(1, n + 1))
        if len(set(labels)) != n:
            raise ValueError("labels must be unique")
        return cls(np.zeros((n, n), dtype=bool), np.eye(n, dtype=bool),
                   np.zeros(n, dtype=np.uint8), labels)

    def copy(self):
        t = Tableau.__new__(Tableau)
        t.x = self.x.copy()
        t.z = self.z.copy()
        t.r = self.r.copy()
        t.labels = list(self.labels)
        return t

    @property
    def n(self):
        return len(self.labels)

    def col(self, label):
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"no qubit labelled {label!r}") from None

    def generator(self, row):
        return PauliOperator(self.x[row].copy(), self.z[row].copy(),
                             int(self.r[row]), tuple(self.labels))

    def generators(self):
        return [self.generator(i) for i in range(self.n)]

    def to_strings(self):
        return [str(g) for g in self.generators()]

    def __str__(self):
        return "\n".join(self.to_strings())

    # ---- invariants ---------------------------------------------------------

    def check_invariants(self):
        n = self.n
        if self.x.shape != (n, n) or self.z.shape != (n, n):
            raise AssertionError("tableau shape mismatch")
        # pairwise commutation: X1.Z2^T + Z1.X2^T even
        xi = self.x.astype(np.uint8)
        zi = self.z.astype(np.uint8)
        sym = (xi @ zi.T + zi @ xi.T) % 2
        if sym.any():
            raise AssertionError("generators do not all commute")
        if _gf2_rank(np.concatenate([xi, zi], axis=1)) != n:
            raise AssertionError("generators are not independent")
        n_y = np.count_nonzero(self.x & self.z, axis=1)
        if ((self.r - n_y) % 2).any():
            raise AssertionError("generator with non-Hermitian phase")

    # ---- internal row ops ----------------------------------------------------

    def _row_mult(self, dst, src):
        """generator[dst] *= generator[src]"""
        self.r[dst] = (int(self.r[dst]) + int(self.r[src]) + 2 * int(
            np.count_nonzero(self.z[dst] & self.x[src]))) % 4
        self.x[dst] ^= self.x[src]
        self.z[dst] ^= self.z[src]

    def _align(self, op):
        """Return (x, z, r) of op reordered to this tableau's labels."""
        if op.labels is None:
            if op.n != self.n:
                raise ValueError(
                    f"operator covers {op.n} qubits, tableau has {self.n}")
            return op.x, op.z, op.r
        if set(op.labels) != set(self.labels):
            raise KeyError(
                f"operator labels {op.labels} do not match tableau labels "
                f"{tuple(self.labels)}")
        perm = [op.labels.index(l) for l in self.labels]
        return op.x[perm], op.z[perm], op.r

    # ---- Clifford gates --------------------------------------------------------

    def apply_clifford(self, gate, targets):
        """Conjugate every generator by H, CNOT or K on labelled targets."""
        gate = gate.upper()
        if gate == "H":
            (q,) = targets
            c = self.col(q)
            self.r = (self.r + 2 * (self.x[:, c] & self.z[:, c])) % 4
            tmp = self.x[:, c].copy()
            self.x[:, c] = self.z[:, c]
            self.z[:, c] = tmp
        elif gate == "CNOT":
            qc, qt = targets
            if qc == qt:
                raise ValueError("CNOT targets must be distinct")
            cc, ct = self.col(qc), self.col(qt)
            self.r = (self.r + 2 * (self.x[:, cc] & self.z[:, ct] &
                                    ~(self.x[:, ct] ^ self.z[:, cc]))) % 4
            self.x[:, ct] ^= self.x[:, cc]
            self.z[:, cc] ^= self.z[:, ct]
        elif gate == "K":
            # phase-type gate fixed by K Y K^dag = X and K Z K^dag = Z;
            # the sign convention X -> -Y makes K^2 act like Z conjugation
            (q,) = targets
            c = self.col(q)
            self.r = (self.r + 3 * self.x[:, c]) % 4
            self.z[:, c] ^= self.x[:, c]
        else:
            raise ValueError(f"unknown gate {gate!r}")
        self.check_invariants()
        return self

    # ---- measurement -------------------------------------------------------------

    def measure(self, op, forced_outcome=None, rng=None):
        """Measure a Hermitian Pauli; returns a MeasurementRecord.

        A deterministic outcome leaves the group unchanged. A random outcome
        needs either `forced_outcome` (regression tests) or `rng`.
        """
        ox, oz, orr = self._align(op)
        aligned = PauliOperator(ox.copy(), oz.copy(), orr,
                                tuple(self.labels))
        if aligned.is_identity():
            raise ValueError("cannot measure the identity operator")
        if not aligned.is_hermitian():
            raise ValueError("measurement operator must be Hermitian")

        anti = np.nonzero(((self.x & oz).sum(axis=1)
                           + (self.z & ox).sum(axis=1)) % 2)[0]
        if len(anti) == 0:
            outcome = self._deterministic_outcome(aligned)
            if forced_outcome is not None and forced_outcome != outcome:
                raise ValueError(
                    f"outcome is deterministically {outcome}, cannot force "
                    f"{forced_outcome}")
            return MeasurementRecord(aligned, outcome, True)

        p = int(anti[0])
        for q in anti[1:]:
            self._row_mult(int(q), p)
        if forced_outcome is not None:
            outcome = int(forced_outcome)
        elif rng is not None:
            outcome = int(rng.integers(2))
        else:
            raise ValueError(
                "random measurement outcome: pass forced_outcome or rng")
        self.x[p] = ox
        self.z[p] = oz
        self.r[p] = (orr + 2 * outcome) % 4
        self.check_invariants()
        return MeasurementRecord(aligned, outcome, False)

    def _deterministic_outcome(self, op):
        """Sign of an operator already in the group (up to sign)."""
        sel = _gf2_solve(
            np.concatenate([self.x, self.z], axis=1).astype(np.uint8),
            np.concatenate([op.x, op.z]).astype(np.uint8))
        if sel is None:
            raise AssertionError(
                "operator commutes with a full tableau but is not in the "
                "group; tableau corrupt")
        prod_r = 0
        px = np.zeros(self.n, dtype=bool)
        pz = np.zeros(self.n, dtype=bool)
        for row in np.nonzero(sel)[0]:
            prod_r = (prod_r + int(self.r[row]) + 2 * int(
                np.count_nonzero(pz & self.x[row]))) % 4
            px ^= self.x[row]
            pz ^= self.z[row]
        return 0 if prod_r == op.r else 1

    # ---- qubit management -----------------------------------------------------------

    def add_qubit(self, label):
        """Append a fresh |0> qubit."""
        if label in self.labels:
            raise ValueError(f"label {label!r} already in use")
        n = self.n
        self.x = np.pad(self.x, ((0, 1), (0, 1)))
        self.z = np.pad(self.z, ((0, 1), (0, 1)))
        self.r = np.append(self.r, np.uint8(0))
        self.z[n, n] = True
        self.labels.append(label)
        self.check_invariants()
        return self

    def remove_qubit(self, label):
        """Drop a qubit that has just been measured out.

        Requires some generator to be a single-qubit Pauli on `label`; all
        other generators are cleared against it, then row and column are
        deleted.
        """
        c = self.col(label)
        support = self.x[:, c] | self.z[:, c]
        single = None
        for row in np.nonzero(support)[0]:
            if self.x[row].sum() + self.z[row].sum() == \
                    int(self.x[row, c]) + int(self.z[row, c]):
                single = int(row)
                break
        if single is None:
            raise ValueError(
                f"qubit {label!r} is still entangled; measure it first")
        for row in np.nonzero(support)[0]:
            if row != single:
                self._row_mult(int(row), single)
        if (self.x[:, c] | self.z[:, c]).sum() != 1:
            raise AssertionError("column not cleared; qubit was entangled")
        keep_rows = np.arange(self.n) != single
        keep_cols = np.arange(self.n) != c
        self.x = self.x[keep_rows][:, keep_cols]
        self.z = self.z[keep_rows][:, keep_cols]
        self.r = self.r[keep_rows]
        del self.labels[c]
        self.check_invariants()
        return self

    def measure_out(self, label, pauli="Z", forced_outcome=None, rng=None):
        """Measure a single qubit destructively and delete it."""
        op = PauliOperator.single(self.n, self.col(label), pauli,
                                  tuple(self.labels))
        rec = self.measure(op, forced_outcome=forced_outcome, rng=rng)
        self.remove_qubit(label)
        return rec

    # ---- photonic building blocks ------------------------------------------------------

    def machine_gun_emit(self, dot, photon, with_hadamard=True):
        """One emission step of the quantum-dot source.

        Appends a fresh photon and entangles it with the dot via CNOT; the
        preceding precession Hadamard is skipped when extending a
        redundantly-encoded block.
        """
        self.add_qubit(photon)
        if with_hadamard:
            self.apply_clifford("H", (dot,))
        self.apply_clifford("CNOT", (dot, photon))
        return self

    def fusion_type_I(self, a, b, success, parity=0, rng=None,
                      forced_x_outcome=None):
        """Probabilistic parity-projection merge of photons a and b.

        On success, Z_a Z_b is projected with the heralded `parity`, b is
        measured in X and deleted, and a carries the merged qubit. On
        failure both photons collapse in Z and b is deleted. Returns the
        measurement records so byproduct Paulis from odd outcomes can be
        corrected by the caller rather than silently dropped.
        """
        if a == b:
            raise ValueError("fusion needs two distinct qubits")
        ca, cb = self.col(a), self.col(b)
        records = []
        if success:
            zz = PauliOperator.single(self.n, ca, "Z", tuple(self.labels)) * \
                PauliOperator.single(self.n, cb, "Z", tuple(self.labels))
            records.append(self.measure(zz, forced_outcome=parity, rng=rng))
            fx = forced_x_outcome
            if fx is None and rng is None:
                fx = 0
            records.append(self.measure_out(b, "X", forced_outcome=fx,
                                            rng=rng))
        else:
            records.append(self.measure(
                PauliOperator.single(self.n, ca, "Z", tuple(self.labels)),
                forced_outcome=None if rng is not None else 0, rng=rng))
            records.append(self.measure_out(
                b, "Z", forced_outcome=None if rng is not None else 0,
                rng=rng))
        return records

    # ---- group queries ----------------------------------------------------------------

    def contains(self, op, up_to_phase=False):
        """Exact group membership, including the sign unless told otherwise."""
        ox, oz, orr = self._align(op)
        sel = _gf2_solve(
            np.concatenate([self.x, self.z], axis=1).astype(np.uint8),
            np.concatenate([ox, oz]).astype(np.uint8))
        if sel is None:
            return False
        if up_to_phase:
            return True
        prod_r = 0
        pz = np.zeros(self.n, dtype=bool)
        for row in np.nonzero(sel)[0]:
            prod_r = (prod_r + int(self.r[row]) + 2 * int(
                np.count_nonzero(pz & self.x[row]))) % 4
            pz ^= self.z[row]
        return prod_r == orr

    def groups_equal(self, other):
        """True when both tableaux generate the same signed group."""
        if self.n != other.n:
            return False
        if self.labels != other.labels:
            if set(self.labels) != set(other.labels):
                return False
        return (all(self.contains(g) for g in other.generators())
                and all(other.contains(g) for g in self.generators()))


# ---- free functions ------------------------------------------------------


def new_computational(n, labels=None):
    """Fresh |0...0> tableau with generators Z_1 .. Z_n."""
    return Tableau.computational(n, labels)


def conjugate_pauli(op, gate, targets, labels):
    """Conjugate a single Pauli by one Clifford gate (by label)."""
    cols = {l: i for i, l in enumerate(labels)}
    x = op.x.copy()
    z = op.z.copy()
    r = op.r
    gate = gate.upper()
    if gate == "H":
        c = cols[targets[0]]
        r = (r + 2 * int(x[c] & z[c])) % 4
        x[c], z[c] = z[c], x[c]
    elif gate == "CNOT":
        cc, ct = cols[targets[0]], cols[targets[1]]
        r = (r + 2 * int(x[cc] & z[ct] & ~(x[ct] ^ z[cc]))) % 4
        x[ct] ^= x[cc]
        z[cc] ^= z[ct]
    elif gate == "K":
        c = cols[targets[0]]
        r = (r + 3 * int(x[c])) % 4
        z[c] ^= x[c]
    else:
        raise ValueError(f"unknown gate {gate!r}")
    return PauliOperator(x, z, r, op.labels)


def inject_and_propagate(circuit, error, position, labels):
    """Push a Pauli error inserted after circuit[position-1] to the end.

    `circuit` is a list of (gate, targets) pairs over the given qubit
    labels; the error is conjugated through circuit[position:].
    """
    if not 0 <= position <= len(circuit):
        raise ValueError(
            f"position {position} outside circuit of length {len(circuit)}")
    out = error
    for gate, targets in circuit[position:]:
        out = conjugate_pauli(out, gate, targets, labels)
    return out


# ---- GF(2) helpers -----------------------------------------------------------


def _gf2_rank(m):
    m = m.astype(np.uint8).copy()
    rank = 0
    rows, cols = m.shape
    for c in range(cols):
        pivot = None
        for rr in range(rank, rows):
            if m[rr, c]:
                pivot = rr
                break
        if pivot is None:
            continue
        m[[rank, pivot]] = m[[pivot, rank]]
        for rr in range(rows):
            if rr != rank and m[rr, c]:
                m[rr] ^= m[rank]
        rank += 1
        if rank == rows:
            break
    return rank


def _gf2_solve(basis_rows, target):
    """Solve c^T . basis_rows = target over GF(2); None if unsolvable."""
    rows, cols = basis_rows.shape
    m = basis_rows.astype(np.uint8).copy()
    sel = np.eye(rows, dtype=np.uint8)
    t = target.astype(np.uint8).copy()
    t_sel = np.zeros(rows, dtype=np.uint8)
    rank = 0
    for c in range(cols):
        pivot = None
        for rr in range(rank, rows):
            if m[rr, c]:
                pivot = rr
                break
        if pivot is None:
            continue
        m[[rank, pivot]] = m[[pivot, rank]]
        sel[[rank, pivot]] = sel[[pivot, rank]]
        for rr in range(rows):
            if rr != rank and m[rr, c]:
                m[rr] ^= m[rank]
                sel[rr] ^= sel[rank]
        if t[c]:
            t ^= m[rank]
            t_sel ^= sel[rank]
        rank += 1
        if rank == rows:
            break
    if t.any():
        return None
    return t_sel
