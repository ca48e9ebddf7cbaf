"""Stabilizer tableau with destabilizers (Aaronson–Gottesman form).

Rows ``0..n-1`` are destabilizers and rows ``n..2n-1`` stabilizers; each
row is a Pauli string ``(-1)^r · ⊗_j X^{x_j} Z^{z_j}`` with ``(1, 1)``
read as ``Y``. Paulis passed to the public methods are dicts mapping a
qubit index to one of ``"X"``, ``"Y"``, ``"Z"``.
"""

from __future__ import annotations

import numpy as np

_BITS = {"X": (1, 0), "Y": (1, 1), "Z": (0, 1)}


def _g(x1, z1, x2, z2):
    """Exponent of i picked up multiplying Pauli (x1,z1) into (x2,z2)."""
    x1, z1, x2, z2 = (a.astype(np.int64) for a in (x1, z1, x2, z2))
    return np.where(
        (x1 == 1) & (z1 == 1),
        z2 - x2,
        np.where(x1 == 1, z2 * (2 * x2 - 1), np.where(z1 == 1, x2 * (1 - 2 * z2), 0)),
    )


class Tableau:
    def __init__(self, n: int = 0):
        self.n = 0
        self.x = np.zeros((0, 0), dtype=np.uint8)
        self.z = np.zeros((0, 0), dtype=np.uint8)
        self.r = np.zeros(0, dtype=np.uint8)
        if n:
            self.add_qubits(n)

    def copy(self) -> "Tableau":
        t = Tableau()
        t.n, t.x, t.z, t.r = self.n, self.x.copy(), self.z.copy(), self.r.copy()
        return t

    def add_qubits(self, k: int) -> list:
        """Append ``k`` qubits in |0⟩; returns their indices."""
        n, m = self.n, self.n + k
        x = np.zeros((2 * m, m), dtype=np.uint8)
        z = np.zeros((2 * m, m), dtype=np.uint8)
        r = np.zeros(2 * m, dtype=np.uint8)
        x[:n, :n], z[:n, :n], r[:n] = self.x[:n], self.z[:n], self.r[:n]
        x[m : m + n, :n], z[m : m + n, :n] = self.x[n:], self.z[n:]
        r[m : m + n] = self.r[n:]
        for j in range(n, m):
            x[j, j] = 1
            z[m + j, j] = 1
        self.n, self.x, self.z, self.r = m, x, z, r
        return list(range(n, m))

    # -- gates -------------------------------------------------------------

    def h(self, q: int) -> None:
        self.r ^= self.x[:, q] & self.z[:, q]
        self.x[:, q], self.z[:, q] = self.z[:, q].copy(), self.x[:, q].copy()

    def s(self, q: int) -> None:
        self.r ^= self.x[:, q] & self.z[:, q]
        self.z[:, q] ^= self.x[:, q]

    def cnot(self, c: int, t: int) -> None:
        self.r ^= self.x[:, c] & self.z[:, t] & (self.x[:, t] ^ self.z[:, c] ^ 1)
        self.x[:, t] ^= self.x[:, c]
        self.z[:, c] ^= self.z[:, t]

    def apply_pauli(self, pauli: dict) -> None:
        """Conjugate by a Pauli: flips signs of anticommuting rows."""
        px, pz = self._vec(pauli)
        self.r ^= self._anticommutes(px, pz)

    # -- helpers -----------------------------------------------------------

    def _vec(self, pauli: dict):
        px = np.zeros(self.n, dtype=np.uint8)
        pz = np.zeros(self.n, dtype=np.uint8)
        for q, p in pauli.items():
            bx, bz = _BITS[p]
            px[q], pz[q] = bx, bz
        return px, pz

    def _anticommutes(self, px, pz) -> np.ndarray:
        return ((self.x @ pz.astype(np.int64) + self.z @ px.astype(np.int64)) % 2).astype(np.uint8)

    def _rowsum_into(self, targets, src: int) -> None:
        """rows[targets] ← rows[targets] · rows[src]."""
        if len(targets) == 0:
            return
        xs, zs = self.x[src], self.z[src]
        xt, zt = self.x[targets], self.z[targets]
        phase = 2 * self.r[targets].astype(np.int64) + 2 * int(self.r[src])
        phase = phase + _g(xs[None, :], zs[None, :], xt, zt).sum(axis=1)
        self.r[targets] = ((phase % 4) // 2).astype(np.uint8)
        self.x[targets] = xt ^ xs
        self.z[targets] = zt ^ zs

    def _stabilizer_product(self, px, pz):
        """Sign bit of ±P as a product of stabilizers, or None if P is not in the group."""
        n = self.n
        anti = self._anticommutes(px, pz)
        if anti[n:].any():
            return None
        rows = np.nonzero(anti[:n])[0] + n
        x = np.zeros(n, dtype=np.uint8)
        z = np.zeros(n, dtype=np.uint8)
        phase = 0
        for i in rows:
            phase += 2 * int(self.r[i]) + int(_g(self.x[i], self.z[i], x, z).sum())
            x ^= self.x[i]
            z ^= self.z[i]
        if not (np.array_equal(x, px) and np.array_equal(z, pz)):
            return None
        return (phase % 4) // 2

    # -- measurement -------------------------------------------------------

    def expectation(self, pauli: dict) -> int:
        """+1 or −1 if the Pauli is (±) a stabilizer, else 0."""
        px, pz = self._vec(pauli)
        bit = self._stabilizer_product(px, pz)
        if bit is None:
            return 0
        return -1 if bit else 1

    def is_deterministic(self, pauli: dict) -> bool:
        px, pz = self._vec(pauli)
        return not self._anticommutes(px, pz)[self.n :].any()

    def measure(self, pauli: dict, forced: int | None = None, rng=None) -> tuple:
        """Measure a Pauli product; returns (outcome bit, was_random).

        ``forced`` sets the outcome only when it is random; otherwise a fair
        coin from ``rng`` is used.
        """
        n = self.n
        px, pz = self._vec(pauli)
        anti = self._anticommutes(px, pz)
        stab = np.nonzero(anti[n:])[0]
        if len(stab) == 0:
            bit = self._stabilizer_product(px, pz)
            assert bit is not None, "commuting Pauli must lie in the stabilizer group"
            return int(bit), False
        p = int(stab[0]) + n
        others = [i for i in np.nonzero(anti)[0] if i != p]
        self._rowsum_into(np.array(others, dtype=np.int64), p)
        self.x[p - n], self.z[p - n], self.r[p - n] = self.x[p], self.z[p], self.r[p]
        if forced is None:
            if rng is None:
                raise ValueError("random outcome needs either forced or rng")
            forced = int(rng.integers(2))
        self.x[p], self.z[p] = px, pz
        self.r[p] = forced
        return int(forced), True
