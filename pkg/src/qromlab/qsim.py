"""Dense state-vector core: named registers, unitaries, measurement, SWAP test.

Register convention: a layout is an ordered tuple of (name, dimension)
registers and basis indices are mixed-radix little-endian: register 0
varies fastest. numpy stores C-order tensors with the *last* axis
fastest, so internally a state reshapes to ``dims[::-1]`` and register
``i`` lives on tensor axis ``n-1-i``. All public operations return new
values; amplitude buffers are frozen on construction.

Measurement is exhaustive by default (exact branch probabilities, no
sampling noise); pass a numpy Generator for sampled demo mode or an int
to force an outcome. Branches below ``PROB_FLOOR`` are treated as
numerically zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, reduce
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

ATOL_UNITARY = 1e-9
ATOL_STATE = 1e-8
PROB_FLOOR = 1e-14

_HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2.0)


@dataclass(frozen=True)
class RegisterLayout:
    """Ordered named registers defining one basis-index space."""

    registers: tuple[tuple[str, int], ...]

    def __post_init__(self) -> None:
        regs = tuple((str(n), int(d)) for n, d in self.registers)
        object.__setattr__(self, "registers", regs)
        names = [n for n, _ in regs]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate register names in {names}")
        if any(d < 1 for _, d in regs):
            raise ValueError("register dimensions must be >= 1")

    @cached_property
    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.registers)

    @cached_property
    def dims(self) -> tuple[int, ...]:
        return tuple(d for _, d in self.registers)

    @cached_property
    def total_dim(self) -> int:
        out = 1
        for d in self.dims:
            out *= d
        return out

    @cached_property
    def strides(self) -> tuple[int, ...]:
        # little-endian: stride of register 0 is 1
        out, acc = [], 1
        for d in self.dims:
            out.append(acc)
            acc *= d
        return tuple(out)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"no register named {name!r}") from None

    def dim_of(self, name: str) -> int:
        return self.dims[self.index(name)]

    def axis_of(self, name: str) -> int:
        """Tensor axis of a register in the reversed-dims reshape."""
        return len(self.registers) - 1 - self.index(name)

    def encode(self, digits: Union[Mapping[str, int], Sequence[int]]) -> int:
        """Flat basis index of an assignment (unnamed registers read 0)."""
        if isinstance(digits, Mapping):
            unknown = set(digits) - set(self.names)
            if unknown:
                raise KeyError(f"unknown registers {sorted(unknown)}")
            digits = [digits.get(n, 0) for n in self.names]
        flat = 0
        for val, dim, stride in zip(digits, self.dims, self.strides, strict=True):
            if not 0 <= val < dim:
                raise ValueError(f"digit {val} out of range for dimension {dim}")
            flat += val * stride
        return flat

    def decode(self, flat: int) -> tuple[int, ...]:
        if not 0 <= flat < self.total_dim:
            raise ValueError(f"index {flat} out of range")
        out = []
        for d in self.dims:
            out.append(flat % d)
            flat //= d
        return tuple(out)

    def digit(self, flat: int, name: str) -> int:
        i = self.index(name)
        return (flat // self.strides[i]) % self.dims[i]


@dataclass(frozen=True)
class StateVector:
    """Immutable normalized amplitude vector over a RegisterLayout."""

    layout: RegisterLayout
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amps.shape != (self.layout.total_dim,):
            raise ValueError(
                f"amplitude length {amps.size} != layout dimension {self.layout.total_dim}"
            )
        n2 = float(np.vdot(amps, amps).real)
        if abs(n2 - 1.0) > ATOL_STATE:
            raise ValueError(f"state not normalized: squared norm {n2}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def basis(
        cls, layout: RegisterLayout, digits: Union[Mapping[str, int], Sequence[int], int] = 0
    ) -> "StateVector":
        flat = digits if isinstance(digits, int) else layout.encode(digits)
        amps = np.zeros(layout.total_dim, dtype=complex)
        amps[flat] = 1.0
        return cls(layout, amps)

    @classmethod
    def from_product(
        cls, layout: RegisterLayout, factors: Mapping[str, Sequence[complex]]
    ) -> "StateVector":
        """Tensor product of one normalized factor per register."""
        if set(factors) != set(layout.names):
            raise KeyError("factors must cover every register exactly")
        arrs = []
        for name in reversed(layout.names):
            a = np.asarray(factors[name], dtype=complex)
            if a.shape != (layout.dim_of(name),):
                raise ValueError(f"factor for {name!r} has wrong length")
            arrs.append(a)
        tensor = reduce(np.multiply.outer, arrs) if len(arrs) > 1 else arrs[0]
        return cls(layout, np.asarray(tensor).reshape(-1))

    def tensor(self) -> np.ndarray:
        """Read-only view shaped dims[::-1] (register i on axis n-1-i)."""
        return self.amplitudes.reshape(self.layout.dims[::-1])

    def squared_norm(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)


@dataclass(frozen=True)
class DensityOnRegister:
    """Density matrix attributed to a single named register."""

    register: str
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("density matrix must be square")
        if np.abs(m - m.conj().T).max() > 1e-10:
            raise ValueError("density matrix not Hermitian within 1e-10")
        if abs(np.trace(m).real - 1.0) > 1e-9:
            raise ValueError(f"density trace {np.trace(m).real} not 1")
        if np.linalg.eigvalsh(m).min() < -1e-10:
            raise ValueError("density matrix has eigenvalue below -1e-10")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def pure(cls, register: str, vector: Sequence[complex]) -> "DensityOnRegister":
        v = np.asarray(vector, dtype=complex).reshape(-1)
        return cls(register, np.outer(v, v.conj()))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def _check_unitary(u: np.ndarray, dim: int) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    if u.shape != (dim, dim):
        raise ValueError(f"unitary shape {u.shape} != ({dim}, {dim})")
    if np.abs(u.conj().T @ u - np.eye(dim)).max() > ATOL_UNITARY:
        raise ValueError("matrix is not unitary within 1e-9")
    return u


def apply_unitary(
    state: StateVector, target_registers: Sequence[str], u: np.ndarray
) -> StateVector:
    """Apply ``u`` to the named registers (identity elsewhere).

    Args:
        state: input state.
        target_registers: register names, first name fastest-varying in
            ``u``'s basis ordering (same little-endian convention as the
            layout itself).
        u: square matrix over the product of the target dimensions;
            checked unitary to 1e-9.

    Returns:
        The transformed state on the same layout.
    """
    layout = state.layout
    targets = list(target_registers)
    if len(set(targets)) != len(targets):
        raise ValueError("repeated target register")
    dims_t = [layout.dim_of(n) for n in targets]
    block = 1
    for d in dims_t:
        block *= d
    u = _check_unitary(u, block)

    m = len(targets)
    # u as a tensor: (out axes reversed-target-order, in axes same)
    u_t = u.reshape(tuple(dims_t[::-1]) * 2)
    axes = [layout.axis_of(n) for n in reversed(targets)]
    t = np.tensordot(u_t, state.tensor(), axes=(list(range(m, 2 * m)), axes))
    t = np.moveaxis(t, list(range(m)), axes)
    return StateVector(layout, np.ascontiguousarray(t).reshape(-1))


MeasureMode = Union[str, int, np.random.Generator]


def measure_register(
    state: StateVector, register: str, mode: MeasureMode = "exhaustive"
):
    """Projective measurement of one register in the computational basis.

    Args:
        state: input state.
        register: register name to measure.
        mode: "exhaustive" returns every branch as a list of
            (outcome, post_state, probability) with probabilities summing
            to 1; a numpy Generator samples one branch; an int forces
            that outcome (error if its probability is numerically zero).

    Returns:
        A list of branch triples in exhaustive mode, otherwise a single
        (outcome, post_state, probability) triple.
    """
    layout = state.layout
    axis = layout.axis_of(register)
    dim = layout.dim_of(register)
    t = state.tensor()
    sum_axes = tuple(a for a in range(t.ndim) if a != axis)
    probs = np.abs(t) ** 2
    probs = probs.sum(axis=sum_axes) if sum_axes else probs
    probs = np.real(probs)

    def branch(o: int):
        p = float(probs[o])
        sl = [slice(None)] * t.ndim
        sl[axis] = o
        post = np.zeros_like(t)
        post[tuple(sl)] = t[tuple(sl)] / np.sqrt(p)
        return (o, StateVector(layout, post.reshape(-1)), p)

    if isinstance(mode, str):
        if mode != "exhaustive":
            raise ValueError(f"unknown measurement mode {mode!r}")
        return [branch(o) for o in range(dim) if probs[o] > PROB_FLOOR]
    if isinstance(mode, np.random.Generator):
        o = int(mode.choice(dim, p=probs / probs.sum()))
        return branch(o)
    o = int(mode)
    if not 0 <= o < dim:
        raise ValueError(f"outcome {o} out of range for dimension {dim}")
    if probs[o] <= PROB_FLOOR:
        raise ValueError(f"forced outcome {o} has zero probability")
    return branch(o)


def partial_trace(state: StateVector, keep: str) -> DensityOnRegister:
    """Reduced density matrix of one register, tracing out the rest."""
    layout = state.layout
    axis = layout.axis_of(keep)
    t = np.moveaxis(state.tensor(), axis, 0)
    m = t.reshape(layout.dim_of(keep), -1)
    return DensityOnRegister(keep, m @ m.conj().T)


def trace_distance(a: DensityOnRegister, b: DensityOnRegister) -> float:
    """(1/2) sum of absolute eigenvalues of (a - b)."""
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch {a.dim} != {b.dim}")
    return float(0.5 * np.abs(np.linalg.eigvalsh(a.matrix - b.matrix)).sum())


def swap_test(rho: DensityOnRegister, sigma: DensityOnRegister) -> float:
    """Acceptance probability (1 + Tr(rho sigma)) / 2, computed directly."""
    if rho.dim != sigma.dim:
        raise ValueError(f"dimension mismatch {rho.dim} != {sigma.dim}")
    return float((1.0 + np.trace(rho.matrix @ sigma.matrix).real) / 2.0)


def _cswap_matrix(dim: int) -> np.ndarray:
    # basis (anc, a, b) little-endian: anc fastest
    size = 2 * dim * dim
    u = np.zeros((size, size))
    for anc in range(2):
        for ia in range(dim):
            for ib in range(dim):
                src = anc + 2 * ia + 2 * dim * ib
                ja, jb = (ib, ia) if anc == 1 else (ia, ib)
                dst = anc + 2 * ja + 2 * dim * jb
                u[dst, src] = 1.0
    return u


def swap_test_circuit(rho: DensityOnRegister, sigma: DensityOnRegister) -> float:
    """SWAP-test acceptance via the explicit ancilla circuit.

    Pure inputs run through Hadamard / controlled-SWAP / Hadamard and
    exhaustive ancilla measurement; mixed inputs are eigendecomposed and
    the pure-state circuit is averaged over the product mixture.
    """
    if rho.dim != sigma.dim:
        raise ValueError(f"dimension mismatch {rho.dim} != {sigma.dim}")
    dim = rho.dim
    layout = RegisterLayout((("anc", 2), ("a", dim), ("b", dim)))
    cswap = _cswap_matrix(dim)

    def pure_accept(u: np.ndarray, v: np.ndarray) -> float:
        st = StateVector.from_product(layout, {"anc": [1, 0], "a": u, "b": v})
        st = apply_unitary(st, ["anc"], _HADAMARD)
        st = apply_unitary(st, ["anc", "a", "b"], cswap)
        st = apply_unitary(st, ["anc"], _HADAMARD)
        branches = measure_register(st, "anc")
        return sum(p for o, _, p in branches if o == 0)

    pr, ur = np.linalg.eigh(rho.matrix)
    ps, us = np.linalg.eigh(sigma.matrix)
    accept = 0.0
    for i, pi in enumerate(pr):
        if pi <= PROB_FLOOR:
            continue
        for j, qj in enumerate(ps):
            if qj <= PROB_FLOOR:
                continue
            accept += float(pi) * float(qj) * pure_accept(ur[:, i], us[:, j])
    return accept
