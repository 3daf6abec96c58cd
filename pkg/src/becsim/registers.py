"""Joint states of several BEC qubits: tensor products, the Sz*Sz entangling
gate, partial trace, and von Neumann entanglement entropy.

Joint amplitudes are stored row-major in site order, site 1 slowest.  Dense
joint vectors are refused above ``MAX_AMPLITUDES`` entries.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import CapacityError, NumericalIntegrityError
from .spin import CoherentParams, SpinState, make_coherent, sqrt_binomial

MAX_AMPLITUDES = 10**7

EIGENVALUE_CLIP = 1e-12  # drop eigenvalues below this before taking logs


@dataclass(frozen=True)
class BecRegister:
    """Pure joint state of M BEC qubits with per-site boson numbers."""

    site_n: tuple[int, ...]
    amps: np.ndarray

    def __post_init__(self):
        site_n = tuple(int(n) for n in self.site_n)
        if len(site_n) < 1 or any(n < 1 for n in site_n):
            raise ValueError("site_n must be a nonempty tuple of positive counts")
        dim = math.prod(n + 1 for n in site_n)
        if dim > MAX_AMPLITUDES:
            raise CapacityError(f"joint dimension {dim} exceeds {MAX_AMPLITUDES}")
        amps = np.asarray(self.amps, dtype=complex).reshape(-1)
        if amps.size != dim:
            raise ValueError(f"amps must have length {dim}, got {amps.size}")
        norm = float(np.sum(np.abs(amps) ** 2))
        if abs(norm - 1.0) > 1e-9:
            raise ValueError(f"register not normalized: {norm}")
        amps = amps / math.sqrt(norm)
        amps.setflags(write=False)
        object.__setattr__(self, "site_n", site_n)
        object.__setattr__(self, "amps", amps)

    @property
    def n_sites(self) -> int:
        return len(self.site_n)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(n + 1 for n in self.site_n)

    def as_tensor(self) -> np.ndarray:
        return self.amps.reshape(self.dims)


@dataclass(frozen=True)
class DensityMatrix:
    """Mixed state over an enumerated basis, validated on construction."""

    dim: int
    entries: np.ndarray
    basis_tag: str = ""

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=complex)
        if entries.shape != (self.dim, self.dim):
            raise ValueError(f"entries must be {self.dim}x{self.dim}")
        tr = complex(np.trace(entries))
        if abs(tr - 1.0) > 1e-10:
            raise NumericalIntegrityError(f"trace deviates from 1 by {abs(tr - 1.0)}")
        herm = np.max(np.abs(entries - entries.conj().T))
        if herm > 1e-10:
            raise NumericalIntegrityError(f"Hermiticity defect {herm}")
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    def eigenvalues(self) -> np.ndarray:
        w = np.linalg.eigvalsh(self.entries)
        if w.min() < -1e-8:
            raise NumericalIntegrityError(f"negative eigenvalue {w.min()}")
        return w


@dataclass(frozen=True)
class EntropyResult:
    """Entanglement entropy in bits alongside its maximum log2(dim)."""

    bits: float
    max_bits: float

    def __post_init__(self):
        if not -1e-9 <= self.bits <= self.max_bits + 1e-9:
            raise NumericalIntegrityError(
                f"entropy {self.bits} outside [0, {self.max_bits}]"
            )


def tensor(states: Sequence[SpinState]) -> BecRegister:
    """Kronecker product of single-site states, in the given site order."""
    if not states:
        raise ValueError("need at least one state")
    amps = states[0].amps
    for s in states[1:]:
        amps = np.kron(amps, s.amps)
    return BecRegister(tuple(s.n_atoms for s in states), amps)


def plus_x_state(n_atoms: int) -> SpinState:
    """The (1/sqrt2, 1/sqrt2) coherent state, the Sx = N eigenstate."""
    r = 1 / math.sqrt(2)
    return make_coherent(CoherentParams(r, r, n_atoms))


def apply_zz(reg: BecRegister, site_i: int, site_j: int, omega_t: float) -> BecRegister:
    """Diagonal evolution exp(-i omega_t Sz_i Sz_j) on the joint state."""
    m = reg.n_sites
    if not (0 <= site_i < m and 0 <= site_j < m) or site_i == site_j:
        raise ValueError(f"invalid site pair ({site_i}, {site_j}) for {m} sites")
    tens = reg.as_tensor()
    shape_i = [1] * m
    shape_i[site_i] = reg.dims[site_i]
    shape_j = [1] * m
    shape_j[site_j] = reg.dims[site_j]
    mi = (2 * np.arange(reg.dims[site_i]) - reg.site_n[site_i]).reshape(shape_i)
    mj = (2 * np.arange(reg.dims[site_j]) - reg.site_n[site_j]).reshape(shape_j)
    phases = np.exp(-1j * omega_t * mi * mj)
    return BecRegister(reg.site_n, (tens * phases).reshape(-1))


def entangled_state_analytic(n1: int, n2: int, omega_t: float) -> BecRegister:
    """Closed form of exp(-i omega_t Sz Sz) on two +x-polarized BECs.

    Site 2 is expanded over its Fock basis; each |k2> is attached to the
    coherent state on site 1 whose azimuth is rotated by (N2 - 2 k2) omega_t.
    """
    if n1 < 1 or n2 < 1:
        raise ValueError("boson numbers must be >= 1")
    amps = np.zeros((n1 + 1, n2 + 1), dtype=complex)
    w2 = sqrt_binomial(n2, np.arange(n2 + 1)) / math.sqrt(2.0**n2)
    r = 1 / math.sqrt(2)
    for k2 in range(n2 + 1):
        chi = (n2 - 2 * k2) * omega_t
        branch = make_coherent(
            CoherentParams(r * cmath.exp(1j * chi), r * cmath.exp(-1j * chi), n1)
        )
        amps[:, k2] = w2[k2] * branch.amps
    return BecRegister((n1, n2), amps.reshape(-1))


def partial_trace(reg: BecRegister, keep_site: int) -> DensityMatrix:
    """Reduced density matrix of one site of a two-site register.

    Registers with more than two sites are reduced by grouping every other
    site into the traced-out factor.
    """
    if not 0 <= keep_site < reg.n_sites:
        raise ValueError(f"invalid site {keep_site}")
    tens = np.moveaxis(reg.as_tensor(), keep_site, 0)
    mat = tens.reshape(reg.dims[keep_site], -1)
    rho = mat @ mat.conj().T
    # symmetrize away rounding noise before the invariant checks
    rho = 0.5 * (rho + rho.conj().T)
    rho /= np.trace(rho).real
    return DensityMatrix(rho.shape[0], rho, basis_tag=f"fock<N={reg.site_n[keep_site]}>")


def entropy(rho: DensityMatrix) -> EntropyResult:
    """Von Neumann entropy -Tr(rho log2 rho) in bits."""
    w = rho.eigenvalues()
    w = w[w > EIGENVALUE_CLIP]
    bits = float(-np.sum(w * np.log2(w)))
    return EntropyResult(max(bits, 0.0), math.log2(rho.dim))


def entanglement_entropy(reg: BecRegister, keep_site: int = 0) -> EntropyResult:
    """Entropy of the reduced state of ``keep_site``."""
    return entropy(partial_trace(reg, keep_site))


def schmidt_weights(reg: BecRegister, site: int = 0) -> np.ndarray:
    """Squared singular values of the bipartition (site | rest)."""
    tens = np.moveaxis(reg.as_tensor(), site, 0)
    sv = np.linalg.svd(tens.reshape(reg.dims[site], -1), compute_uv=False)
    return sv**2


def register_fidelity(r1: BecRegister, r2: BecRegister) -> float:
    """|<r1|r2>|^2 between two joint pure states."""
    if r1.site_n != r2.site_n:
        raise ValueError("registers must have matching site structure")
    return abs(np.vdot(r1.amps, r2.amps)) ** 2


def cat_decomposition(n_atoms: int) -> BecRegister:
    """Two-branch coherent-state decomposition of the state at omega_t = pi/4.

    Splitting the site-1 Fock sum by parity attaches each half to one of two
    antipodal-azimuth coherent states on site 2, a macroscopic superposition.
    The even/odd weights carry phases i^(N k1), which reduce to the plain
    (|+x> +- |-x>) combinations when N is a multiple of four.
    """
    if n_atoms < 1:
        raise ValueError("n_atoms must be >= 1")
    n = n_atoms
    r = 1 / math.sqrt(2)
    alpha_c = r * cmath.exp(1j * math.pi * n / 4)
    beta_c = r * cmath.exp(-1j * math.pi * n / 4)
    branch_even = make_coherent(CoherentParams(alpha_c, beta_c, n))
    branch_odd = make_coherent(CoherentParams(-alpha_c, beta_c, n))
    k1 = np.arange(n + 1)
    weights = sqrt_binomial(n, k1) / math.sqrt(2.0**n) * np.exp(1j * math.pi * n * k1 / 2)
    amps = np.zeros((n + 1, n + 1), dtype=complex)
    even = k1 % 2 == 0
    amps[even, :] = weights[even, None] * branch_even.amps[None, :]
    amps[~even, :] = weights[~even, None] * branch_odd.amps[None, :]
    return BecRegister((n, n), amps.reshape(-1))


def cat_decomposition_check(n_atoms: int) -> float:
    """Fidelity of the two-branch cat decomposition against the exact gate."""
    start = tensor([plus_x_state(n_atoms), plus_x_state(n_atoms)])
    evolved = apply_zz(start, 0, 1, math.pi / 4)
    return register_fidelity(cat_decomposition(n_atoms), evolved)


def number_fluctuation_error(n_atoms: int, d_n: int) -> float:
    """Relative azimuth error of the k2 = 0 branch under miscounted atoms.

    A gate timed for N atoms but acting on N + dN leaves the extremal branch
    rotated by (N + dN) pi/4N instead of pi/4; the mismatch is dN/N of the
    target angle.
    """
    if n_atoms < 1:
        raise ValueError("n_atoms must be >= 1")
    if abs(d_n) >= n_atoms:
        raise ValueError("|d_n| must be smaller than n_atoms")
    omega_t = math.pi / (4 * n_atoms)
    actual = (n_atoms + d_n) * omega_t
    target = math.pi / 4
    return (actual - target) / target
