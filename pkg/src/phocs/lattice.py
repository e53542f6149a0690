"""Cubic cell complex on an L x L x L 3-torus, tracking face qubits.

Qubits sit on the faces of the cells; the decoder works with the parity of
the six faces around each cell. Faces are owned by their lower-corner cell
and named by their normal axis, giving the dense index

    face_index = 3 * (i + L*j + L*L*k) + axis

with axis 0, 1, 2 for x, y, z. The photon stream direction is fixed to z:
a z-normal face needs fusions on all four of its transverse bonds, an x- or
y-normal face on two.
"""

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

AXES = "xyz"
STREAM_AXIS = 2  # machine-gun streams run along z

# transverse fusion bonds per face, by face normal (see module docstring)
FUSION_BONDS_BY_AXIS = (2, 2, 4)


class CellCoord(NamedTuple):
    i: int
    j: int
    k: int


class FaceCoord(NamedTuple):
    cell: CellCoord
    axis: int  # 0=x, 1=y, 2=z (face normal)


class QubitRole(NamedTuple):
    """Fusion workload of one face qubit."""

    fusion_bonds: int

    def photons(self, R):
        """Number of redundantly-encoded photons making up the qubit."""
        return self.fusion_bonds * R + 1


@dataclass
class Lattice:
    """Periodic L x L x L cell complex with precomputed incidence tables."""

    L: int
    n_cells: int = field(init=False)
    n_faces: int = field(init=False)
    face_cells: np.ndarray = field(init=False, repr=False)  # (F, 2) int32
    cell_faces: np.ndarray = field(init=False, repr=False)  # (C, 6) int32
    face_axis: np.ndarray = field(init=False, repr=False)   # (F,) int8
    fusion_bonds: np.ndarray = field(init=False, repr=False)  # (F,) int8
    seam_faces: tuple = field(init=False, repr=False)  # per-axis index arrays

    def __post_init__(self):
        L = self.L
        if L < 2:
            raise ValueError(
                f"lattice size must be at least 2, got {L} "
                "(at L=1 each face would touch the same cell twice)")
        C = L ** 3
        F = 3 * C
        self.n_cells = C
        self.n_faces = F

        cells = np.arange(C)
        i = cells % L
        j = (cells // L) % L
        k = cells // (L * L)

        # owner cell of every face, replicated per axis
        self.face_axis = np.tile(np.array([0, 1, 2], dtype=np.int8), C)
        owner = np.repeat(cells, 3)
        neigh = np.empty(F, dtype=np.int64)
        neigh[0::3] = ((i + 1) % L) + L * j + L * L * k
        neigh[1::3] = i + L * ((j + 1) % L) + L * L * k
        neigh[2::3] = i + L * j + L * L * ((k + 1) % L)
        self.face_cells = np.stack(
            [owner, neigh], axis=1).astype(np.int32)

        cf = np.empty((C, 6), dtype=np.int32)
        cf[:, 0] = 3 * cells + 0
        cf[:, 1] = 3 * cells + 1
        cf[:, 2] = 3 * cells + 2
        cf[:, 3] = 3 * (((i - 1) % L) + L * j + L * L * k) + 0
        cf[:, 4] = 3 * (i + L * ((j - 1) % L) + L * L * k) + 1
        cf[:, 5] = 3 * (i + L * j + L * L * ((k - 1) % L)) + 2
        self.cell_faces = cf

        self.fusion_bonds = np.where(
            self.face_axis == STREAM_AXIS, 4, 2).astype(np.int8)

        seams = []
        for axis in range(3):
            coord = (i, j, k)[axis]
            wrap_cells = cells[coord == L - 1]
            seams.append((3 * wrap_cells + axis).astype(np.int64))
        self.seam_faces = tuple(seams)

    # ---- coordinate conversions ------------------------------------------

    def cell_index(self, c):
        i, j, k = (x % self.L for x in c)
        return i + self.L * j + self.L * self.L * k

    def cell_coord(self, idx):
        L = self.L
        return CellCoord(int(idx % L), int((idx // L) % L),
                         int(idx // (L * L)))

    def face_index(self, f):
        cell, axis = f
        if isinstance(axis, str):
            axis = AXES.index(axis)
        return 3 * self.cell_index(cell) + axis

    def face_coord(self, idx):
        return FaceCoord(self.cell_coord(idx // 3), int(idx % 3))

    def cell_coords_array(self):
        """(C, 3) integer coordinates of every cell."""
        cells = np.arange(self.n_cells)
        L = self.L
        return np.stack([cells % L, (cells // L) % L, cells // (L * L)],
                        axis=1)

    # ---- incidence ---------------------------------------------------------

    def incident_cells(self, f):
        """The two cells sharing face f, owner first."""
        fi = self.face_index(f)
        a, b = self.face_cells[fi]
        return self.cell_coord(a), self.cell_coord(b)

    def faces_of_cell(self, c):
        """The six faces around cell c."""
        ci = self.cell_index(c)
        return [self.face_coord(fi) for fi in self.cell_faces[ci]]

    def role(self, f):
        """Fusion workload of face f: four bonds on the stream axis, else two."""
        fi = self.face_index(f)
        return QubitRole(int(self.fusion_bonds[fi]))


def build(L):
    """Construct the periodic lattice; rejects L < 2."""
    return Lattice(L)
