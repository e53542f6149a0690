"""Syndrome extraction, matching decoder and homology classification.

A trial works at the level of cell parities. The parity-toggling face set is
flips XOR lost_outcomes; odd cells are paired up by exact minimum-weight
perfect matching and the correction is the XOR of one minimal path per
matched pair. The decoded trial fails when the residual (true toggles XOR
correction) winds around any direction of the torus.

Two loss policies are supported:

* ``adapted``  - heralded losses are preprocessed: traversing a lost face is
  free, which merges the cells across it into supercells (their combined
  parity is still meaningful) and routes corrections freely through erased
  regions. Pure loss then only fails when an erased cluster wraps the torus.
* ``blind``    - the heralding is ignored by the decoder: every face costs 1,
  so the random measurement bits of lost qubits act as ordinary flips at
  rate one half. This is the harsher accounting that treats a decohered
  block as a plain error source.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
from numba import njit

from ._blossom import min_weight_perfect_matching

_BIG = np.int32(1 << 30)

LOSS_POLICIES = ("adapted", "blind")


# ---------------------------------------------------------------------------
# supercells
# ---------------------------------------------------------------------------


@dataclass
class SupercellPartition:
    """Cells merged across heralded-lost faces.

    group_of maps every cell to its group id (the smallest member cell);
    members lists the cells of each group, keyed by group id; parity holds
    the XOR of member-cell parities once a syndrome has been extracted.
    """

    group_of: np.ndarray
    members: dict
    parity: Optional[dict] = None


def build_supercells(lat, lost):
    """Union cells across every lost face; no losses gives all singletons."""
    parent = np.arange(lat.n_cells, dtype=np.int64)

    def find(a):
        root = a
        while parent[root] != root:
            root = parent[root]
        while parent[a] != root:
            parent[a], a = root, parent[a]
        return root

    for f in np.nonzero(lost)[0]:
        a, b = lat.face_cells[f]
        ra, rb = find(int(a)), find(int(b))
        if ra != rb:
            # canonical root: smallest cell index
            lo, hi = (ra, rb) if ra < rb else (rb, ra)
            parent[hi] = lo
    group_of = np.array([find(int(c)) for c in range(lat.n_cells)],
                        dtype=np.int64)
    members = {}
    for c, g in enumerate(group_of):
        members.setdefault(int(g), []).append(c)
    return SupercellPartition(group_of, members)


# ---------------------------------------------------------------------------
# syndrome
# ---------------------------------------------------------------------------


@dataclass
class SyndromeSet:
    """Odd-parity supercell groups; always even in number on the torus."""

    odd_groups: list


def cell_parities(toggled_faces, lat):
    """Per-cell syndrome bits: XOR of the toggled faces around each cell."""
    flipped = np.nonzero(toggled_faces)[0]
    if len(flipped) == 0:
        return np.zeros(lat.n_cells, dtype=np.uint8)
    counts = np.bincount(lat.face_cells[flipped].ravel(),
                         minlength=lat.n_cells)
    return (counts & 1).astype(np.uint8)


def extract_syndrome(cfg, part, lat):
    """Odd-parity groups of a sampled configuration under a partition."""
    parities = cell_parities(cfg.total_flips(), lat)
    group_par = {}
    for g, cells in part.members.items():
        group_par[g] = int(np.bitwise_xor.reduce(parities[cells]))
    part.parity = group_par
    odd = sorted(g for g, p in group_par.items() if p)
    return SyndromeSet(odd)


# ---------------------------------------------------------------------------
# shortest paths (0-1 BFS over the cell adjacency graph)
# ---------------------------------------------------------------------------


@njit(cache=True)
def _bfs01(sources, cell_faces, face_cells, face_weight, dist, parent_face,
           deque_buf):
    """Multi-source 0-1 BFS; fills dist and the face used to reach each cell."""
    C = dist.shape[0]
    for c in range(C):
        dist[c] = _BIG
        parent_face[c] = -1
    mid = 6 * C + 8
    head = mid
    tail = mid
    for i in range(sources.shape[0]):
        s = sources[i]
        dist[s] = 0
        deque_buf[tail] = s
        tail += 1
    while head < tail:
        c = deque_buf[head]
        head += 1
        dc = dist[c]
        for e in range(6):
            f = cell_faces[c, e]
            a = face_cells[f, 0]
            o = face_cells[f, 1] if a == c else a
            nd = dc + face_weight[f]
            if nd < dist[o]:
                dist[o] = nd
                parent_face[o] = f
                if face_weight[f] == 0:
                    head -= 1
                    deque_buf[head] = o
                else:
                    deque_buf[tail] = o
                    tail += 1


def _bfs_from(lat, sources, face_weight):
    dist = np.empty(lat.n_cells, dtype=np.int32)
    parent = np.empty(lat.n_cells, dtype=np.int32)
    buf = np.empty(13 * lat.n_cells + 16, dtype=np.int32)
    _bfs01(np.asarray(sources, dtype=np.int64), lat.cell_faces,
           lat.face_cells, face_weight, dist, parent, buf)
    return dist, parent


def _walk_back(lat, parent_face, end_cell):
    """Faces of the shortest path from a BFS source to end_cell.

    Free (lost-face) hops are part of the path: they carry no weight but
    they do carry parity, so the correction chain must include them.
    """
    faces = []
    c = int(end_cell)
    while parent_face[c] != -1:
        f = int(parent_face[c])
        faces.append(f)
        a, b = lat.face_cells[f]
        c = int(b) if int(a) == c else int(a)
    return faces


def defect_distances(syndrome, part, lost, lat):
    """Pairwise group distances with one minimal face path per pair.

    Edges through lost faces are free, so intra-group distances vanish and
    erased regions act as shortcuts. Returns (dist_matrix, witnesses) where
    witnesses[(i, j)] is a face list realizing dist_matrix[i, j].
    """
    odd = syndrome.odd_groups
    if len(odd) % 2 != 0:
        raise RuntimeError(
            f"odd number of defects ({len(odd)}); parity bookkeeping broken")
    m = len(odd)
    weight = np.where(np.asarray(lost, dtype=bool), 0, 1).astype(np.int32)
    dmat = np.zeros((m, m), dtype=np.int64)
    wit = {}
    for i, g in enumerate(odd):
        dist, parent = _bfs_from(lat, part.members[g], weight)
        for j in range(i + 1, m):
            cells_j = part.members[odd[j]]
            dj = dist[cells_j]
            k = int(np.argmin(dj))
            dmat[i, j] = dmat[j, i] = int(dj[k])
            wit[(i, j)] = _walk_back(lat, parent, cells_j[k])
    return dmat, wit


# ---------------------------------------------------------------------------
# matching
# ---------------------------------------------------------------------------


def mwpm(dist_matrix):
    """Exact minimum-weight perfect matching; returns sorted index pairs."""
    n = np.asarray(dist_matrix).shape[0]
    if n % 2 != 0:
        raise RuntimeError(
            f"cannot match an odd number of defects ({n}); "
            "even parity is guaranteed on the torus, so this is a bug")
    mate, total = min_weight_perfect_matching(dist_matrix)
    pairs = sorted((i, int(mate[i])) for i in range(n) if i < mate[i])
    return pairs, total


# ---------------------------------------------------------------------------
# homology
# ---------------------------------------------------------------------------


class HomologyClass(tuple):
    """Winding parities (wx, wy, wz) of a closed face chain."""

    __slots__ = ()

    def __new__(cls, wx, wy, wz):
        return super().__new__(cls, (int(wx), int(wy), int(wz)))

    @property
    def trivial(self):
        return self == (0, 0, 0)


def winding_parity(chain, lat):
    """Homology class of a closed chain: seam-crossing parities per axis.

    Any plane parallel to the seam gives the same parity for a closed
    chain; the wrap layer is just the fixed convention.
    """
    chain = np.asarray(chain).astype(bool)
    if cell_parities(chain, lat).any():
        raise ValueError("chain has a nonempty boundary; no homology class")
    return HomologyClass(*(int(chain[s].sum() & 1) for s in lat.seam_faces))


# ---------------------------------------------------------------------------
# full trial
# ---------------------------------------------------------------------------


@dataclass
class CorrectionChain:
    faces: np.ndarray


@dataclass
class TrialResult:
    failed: bool
    homology: HomologyClass
    defect_count: int
    matching_weight: int
    correction: Optional[np.ndarray] = None
    residual: Optional[np.ndarray] = None
    pairs: Optional[list] = None


def _manhattan_distances(coords, L):
    delta = np.abs(coords[:, None, :] - coords[None, :, :])
    return np.minimum(delta, L - delta).sum(axis=2).astype(np.int64)


def _manhattan_path(lat, ca, cb):
    """Canonical minimal torus path from cell ca to cell cb (face list).

    Axes are consumed in x, y, z order; the positive direction wins ties.
    """
    L = lat.L
    cur = list(lat.cell_coord(ca))
    tgt = lat.cell_coord(cb)
    faces = []
    for axis in range(3):
        delta = (tgt[axis] - cur[axis]) % L
        if delta == 0:
            continue
        if delta <= L - delta:
            for _ in range(delta):
                faces.append(3 * (cur[0] + L * cur[1] + L * L * cur[2])
                             + axis)
                cur[axis] = (cur[axis] + 1) % L
        else:
            for _ in range(L - delta):
                cur[axis] = (cur[axis] - 1) % L
                faces.append(3 * (cur[0] + L * cur[1] + L * L * cur[2])
                             + axis)
    return faces


def decode_trial(cfg, lat, loss_policy="adapted", detail=False):
    """Decode one sampled configuration end to end.

    Builds the syndrome, matches the odd cells (free routing through lost
    faces under the adapted policy, unit weights under blind), applies the
    correction and classifies the residual's homology. The residual is
    asserted syndrome-free on every trial.
    """
    if loss_policy not in LOSS_POLICIES:
        raise ValueError(f"unknown loss policy {loss_policy!r}")
    toggles = cfg.total_flips()
    parities = cell_parities(toggles, lat)
    defects = np.nonzero(parities)[0]
    n_def = len(defects)
    if n_def % 2 != 0:
        raise RuntimeError(
            f"odd defect count {n_def}; parity bookkeeping broken")

    corr_faces = []
    weight_total = 0
    pairs = []
    if n_def:
        if loss_policy == "blind":
            coords = np.stack([defects % lat.L, (defects // lat.L) % lat.L,
                               defects // (lat.L * lat.L)], axis=1)
            dmat = _manhattan_distances(coords, lat.L)
            pairs, weight_total = mwpm(dmat)
            for i, j in pairs:
                corr_faces.extend(
                    _manhattan_path(lat, int(defects[i]), int(defects[j])))
        else:
            weight = np.where(cfg.lost.astype(bool), 0, 1).astype(np.int32)
            dmat = np.zeros((n_def, n_def), dtype=np.int64)
            parents = np.empty((n_def, lat.n_cells), dtype=np.int32)
            dist = np.empty(lat.n_cells, dtype=np.int32)
            buf = np.empty(13 * lat.n_cells + 16, dtype=np.int32)
            src = np.empty(1, dtype=np.int64)
            for i in range(n_def):
                src[0] = defects[i]
                _bfs01(src, lat.cell_faces, lat.face_cells, weight, dist,
                       parents[i], buf)
                dmat[i] = dist[defects]
            dmat = np.minimum(dmat, dmat.T)  # symmetrize exact ties
            pairs, weight_total = mwpm(dmat)
            for i, j in pairs:
                corr_faces.extend(
                    _walk_back(lat, parents[i], int(defects[j])))

    if corr_faces:
        correction = (np.bincount(np.asarray(corr_faces),
                                  minlength=lat.n_faces) & 1).astype(np.uint8)
    else:
        correction = np.zeros(lat.n_faces, dtype=np.uint8)
    residual = toggles ^ correction
    if cell_parities(residual, lat).any():
        raise AssertionError(
            "correction failed to clear the syndrome; decoder bug")
    cls = winding_parity(residual, lat)
    return TrialResult(
        failed=not cls.trivial,
        homology=cls,
        defect_count=int(n_def),
        matching_weight=int(weight_total),
        correction=correction if detail else None,
        residual=residual if detail else None,
        pairs=pairs if detail else None,
    )
