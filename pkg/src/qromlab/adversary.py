"""Adversarial verifier machines and black-box query algorithms.

A machine packages one verifier kind as an explicit step unitary over
named registers: a basis permutation doing the count/swap/respond
bookkeeping, optionally followed by transcript-controlled adjusting
rotations on the table register. Simulators are step lists that may
call the machine forward or inverted, query named classical tables in
superposition, and measure visible registers; an executor runs them
branch by branch under strict invocation budgets and can hand single
queries to an interceptor. Kinds whose control registers stay classical
are simulated by enumerating every control assignment exactly and
mixing the resulting branches with rational weights.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import cached_property
from typing import Callable, Hashable, Mapping, Optional, Sequence, Union

import numpy as np

from qromlab.hashfam import (
    TwoQWiseFamily,
    build_efficient_adjuster,
    build_exact_adjuster,
    table_superposition,
)
from qromlab.oracle import (
    ClassicalOracle,
    SparseOracleDist,
    prefix_domain,
    prefixes,
    quantum_query,
)
from qromlab.protocol import ProtocolSpec
from qromlab.qsim import (
    ATOL_UNITARY,
    PROB_FLOOR,
    DensityOnRegister,
    RegisterLayout,
    StateVector,
    apply_unitary,
    measure_register,
    partial_trace,
)

VERIFIER_KINDS = (
    "random_aborting",
    "superposition",
    "superposition_efficient",
    "public_coin",
    "three_round",
)
_COHERENT = ("superposition", "superposition_efficient")
MAX_STATE_DIM = 2**17
MAX_MATRIX_DIM = 2**11
_EXACT_TOL = 1e-12


def challenge_structure(spec: ProtocolSpec, x: Hashable):
    """Challenge alphabet and challenge-to-randomness chart of a spec.

    Verifies the public-coin structure directly rather than trusting
    the flag: the round-1 response may depend on the randomness only,
    and distinct randomness must yield distinct challenges. Only
    two-move specs are supported.

    Returns:
        (challenges, chart) with challenges in first-appearance order
        and chart mapping each challenge tuple to its randomness label.
    """
    if spec.rounds != 2:
        raise ValueError("challenge extraction needs exactly two prover moves")
    a0 = spec.alphabet[0]
    alpha = set(spec.alphabet)
    by_r: dict[Hashable, Hashable] = {}
    chart: dict[tuple, Hashable] = {}
    order: list[Hashable] = []
    for r in spec.randomness:
        c = spec.next_message(x, r, (a0,))
        if c not in alpha:
            raise ValueError(f"challenge {c!r} leaves the message alphabet")
        if (c,) in chart:
            raise ValueError("randomness does not map injectively onto challenges")
        by_r[r] = c
        chart[(c,)] = r
        order.append(c)
    for m1 in spec.alphabet:
        for r in spec.randomness:
            if spec.next_message(x, r, (m1,)) != by_r[r]:
                raise ValueError("round-1 response depends on the prover message")
    return tuple(order), chart


@dataclass(frozen=True)
class VerifierMachine:
    """One verifier kind bound to a statement, as an explicit step unitary.

    The layout orders control registers first (Cont, R, then the table
    register H or K), the count/transcript/decision block next, and the
    message register M last. ``fixed`` pins control roles to classical
    values; pinned registers are dropped from the layout.
    """

    kind: str
    spec: ProtocolSpec
    x: Hashable
    layout: RegisterLayout
    output_register: tuple[str, ...]
    eps: Optional[Fraction] = None
    family: Optional[TwoQWiseFamily] = None
    fixed: tuple[tuple[str, object], ...] = ()

    @property
    def k(self) -> int:
        return self.spec.rounds

    @property
    def message_registers(self) -> tuple[str, ...]:
        return tuple(f"M{i}" for i in range(1, self.k + 1))

    def fixed_value(self, role: str):
        for name, value in self.fixed:
            if name == role:
                return value
        return None

    @cached_property
    def _alpha_index(self) -> dict:
        return {a: i for i, a in enumerate(self.spec.alphabet)}

    @cached_property
    def _prefix_points(self) -> tuple[tuple, ...]:
        depth = self.k - 1 if self.kind == "public_coin" else self.k
        return prefix_domain(self.spec.alphabet, depth)

    @cached_property
    def _prefix_index(self) -> dict:
        return {p: i for i, p in enumerate(self._prefix_points)}

    @cached_property
    def _challenges(self):
        return challenge_structure(self.spec, self.x)

    @cached_property
    def _key_flags(self) -> np.ndarray:
        fam = self.family
        flags = np.zeros((fam.key_count, len(fam.domain)), dtype=np.uint8)
        for key in range(fam.key_count):
            for j, point in enumerate(fam.domain):
                flags[key, j] = fam.predicate(key, point)
        return flags

    @cached_property
    def _step_perm(self) -> np.ndarray:
        """Basis permutation of one call: count, swap, respond, decide."""
        lay, spec, x, k = self.layout, self.spec, self.x, self.k
        n = len(spec.alphabet)
        aidx = self._alpha_index
        pos = {name: i for i, name in enumerate(lay.names)}
        i_count, i_b, i_m = pos["Count"], pos["B"], pos["M"]
        i_msg = [pos[f"M{i}"] for i in range(1, k + 1)]
        pos_cont = pos.get("Cont")
        kind = self.kind

        # digit tuple -> (table position, labels) for every live prefix
        pref_info: dict[tuple, tuple[int, tuple]] = {}
        pidx = self._prefix_index
        for i in range(1, len(self._prefix_points[-1]) + 1):
            for digs in itertools.product(range(n), repeat=i):
                labels = tuple(spec.alphabet[d] for d in digs)
                pref_info[digs] = (pidx[labels], labels)

        if kind in ("random_aborting",) + _COHERENT:
            pos_r, pos_h, pos_k = pos.get("R"), pos.get("H"), pos.get("K")
            fixed_r, fixed_h = self.fixed_value("R"), self.fixed_value("H")
            rs = spec.randomness
            fixed_flags = None
            if pos_h is None and pos_k is None:
                fixed_flags = tuple(int(fixed_h(p)) for p in self._prefix_points)
            kflags = self._key_flags if pos_k is not None else None
            r_pool = [fixed_r] if pos_r is None else list(rs)
            resp_tab = {
                (r, digs): aidx[spec.next_message(x, r, labels)]
                for r in r_pool
                for digs, (_, labels) in pref_info.items()
                if len(digs) < k
            }
            acc_tab = {
                (r, digs): int(bool(spec.decide(x, r, pref_info[digs][1])))
                for r in r_pool
                for digs in itertools.product(range(n), repeat=k)
            }

            def flag(dg, pf):
                if pos_h is not None:
                    return (dg[pos_h] >> pf) & 1
                if pos_k is not None:
                    return int(kflags[dg[pos_k], pf])
                return fixed_flags[pf]

            def act(dg, j, final):
                r = fixed_r if pos_r is None else rs[dg[pos_r]]
                gated = pos_cont is None or dg[pos_cont] == 1
                if final:
                    mdigs = tuple(dg[s] for s in i_msg)
                    ok = acc_tab[(r, mdigs)]
                    if ok and gated:
                        for i in range(1, k + 1):
                            if not flag(dg, pref_info[mdigs[:i]][0]):
                                ok = 0
                                break
                    dg[i_b] ^= ok
                else:
                    pdigs = tuple(dg[i_msg[t]] for t in range(j + 1))
                    resp = resp_tab[(r, pdigs)]
                    if gated and not flag(dg, pref_info[pdigs][0]):
                        resp = 0
                    dg[i_m] = (dg[i_m] + resp) % n

        elif kind == "public_coin":
            challenges, chart = self._challenges
            nc = len(challenges)
            cidx = {c: i for i, c in enumerate(challenges)}
            pos_h = pos.get("H")
            fixed_digits = None
            if pos_h is None:
                fixed_h = self.fixed_value("H")
                fixed_digits = tuple(cidx[fixed_h(p)] for p in self._prefix_points)

            def chal(dg, pf):
                if pos_h is None:
                    return fixed_digits[pf]
                return (dg[pos_h] // nc**pf) % nc

            acc_memo: dict = {}

            def act(dg, j, final):
                if final:
                    mdigs = tuple(dg[s] for s in i_msg)
                    cs = tuple(
                        challenges[chal(dg, pref_info[mdigs[:i]][0])]
                        for i in range(1, k)
                    )
                    key = (cs, mdigs)
                    ok = acc_memo.get(key)
                    if ok is None:
                        labels = tuple(spec.alphabet[d] for d in mdigs)
                        ok = int(bool(spec.decide(x, chart[cs], labels)))
                        acc_memo[key] = ok
                    dg[i_b] ^= ok
                else:
                    pdigs = tuple(dg[i_msg[t]] for t in range(j + 1))
                    c = challenges[chal(dg, pref_info[pdigs][0])]
                    dg[i_m] = (dg[i_m] + aidx[c]) % n

        else:  # three_round: the table hashes the first message to randomness
            rs = spec.randomness
            nr = len(rs)
            pos_h = pos.get("H")
            fixed_digits = None
            if pos_h is None:
                fixed_h = self.fixed_value("H")
                rpos = {r: i for i, r in enumerate(rs)}
                fixed_digits = tuple(rpos[fixed_h(a)] for a in spec.alphabet)

            def hdig(dg, m1d):
                if pos_h is None:
                    return fixed_digits[m1d]
                return (dg[pos_h] // nr**m1d) % nr

            resp_tab = {
                (ri, m1d): aidx[spec.next_message(x, rs[ri], (spec.alphabet[m1d],))]
                for ri in range(nr)
                for m1d in range(n)
            }
            acc_tab = {
                (ri, digs): int(
                    bool(spec.decide(x, rs[ri], tuple(spec.alphabet[d] for d in digs)))
                )
                for ri in range(nr)
                for digs in itertools.product(range(n), repeat=2)
            }

            def act(dg, j, final):
                m1d = dg[i_msg[0]]
                if final:
                    dg[i_b] ^= acc_tab[(hdig(dg, m1d), (m1d, dg[i_msg[1]]))]
                else:
                    dg[i_m] = (dg[i_m] + resp_tab[(hdig(dg, m1d), m1d)]) % n

        perm = np.empty(lay.total_dim, dtype=np.int64)
        for flat in range(lay.total_dim):
            dg = list(lay.decode(flat))
            j = dg[i_count]
            dg[i_count] = (j + 1) % k
            slot = i_msg[j]
            dg[i_m], dg[slot] = dg[slot], dg[i_m]
            act(dg, j, j == k - 1)
            perm[flat] = lay.encode(dg)
        return perm

    @cached_property
    def _adjuster_blocks(self):
        """Per-transcript table rotations and the index sets they act on."""
        if self.kind not in _COHERENT:
            return None
        lay = self.layout
        if lay.names[:2] != ("Cont", "R") or lay.names[2] not in ("H", "K"):
            raise AssertionError("unexpected coherent-kind register order")
        n, k = len(self.spec.alphabet), self.k
        inner_dim = lay.dims[0] * lay.dims[1]
        table_dim = lay.dims[2]
        outer = RegisterLayout(lay.registers[3:])
        if self.kind == "superposition":
            dist = SparseOracleDist(self._prefix_points, self.eps)
        blocks = []
        for mdigs in itertools.product(range(n), repeat=k):
            labels = tuple(self.spec.alphabet[d] for d in mdigs)
            if self.kind == "superposition":
                mat = build_exact_adjuster(labels, dist).matrix
            else:
                mat = build_efficient_adjuster(labels, self.family).matrix
            sel = [
                f
                for f in range(outer.total_dim)
                if outer.digit(f, "Count") == 0
                and all(outer.digit(f, f"M{i + 1}") == mdigs[i] for i in range(k))
            ]
            blocks.append((np.array(sel, dtype=np.intp), mat))
        # Cont is the fastest digit, so Cont = 0 lives on the even inner slots
        inner_sel = np.arange(0, inner_dim, 2, dtype=np.intp)
        return inner_dim, table_dim, outer.total_dim, inner_sel, tuple(blocks)

    def _apply_adjusters(self, rows: np.ndarray, forward: bool) -> np.ndarray:
        """Rotate the table axis of each just-finished Cont=0 block, in place."""
        info = self._adjuster_blocks
        if info is None:
            return rows
        inner_dim, table_dim, outer_dim, inner_sel, blocks = info
        w = rows.shape[0]
        arr = rows.reshape(w, outer_dim, table_dim, inner_dim)
        wi = np.arange(w)
        ti = np.arange(table_dim)
        for sel, mat in blocks:
            u = mat if forward else mat.conj().T
            idx = np.ix_(wi, sel, ti, inner_sel)
            arr[idx] = np.einsum("ab,wsbi->wsai", u, arr[idx])
        return arr.reshape(w, -1)


def build_verifier(
    kind: str,
    spec: ProtocolSpec,
    x: Hashable,
    *,
    eps=None,
    family: TwoQWiseFamily | None = None,
    fixed: Mapping[str, object] | None = None,
) -> VerifierMachine:
    """Construct one verifier kind for a statement.

    Args:
        kind: one of VERIFIER_KINDS.
        eps: predicate density for the aborting kinds (rational).
        family: shifted predicate family for superposition_efficient.
        fixed: classical values for control roles ("R", "H"); pinned
            registers are dropped from the layout, which is how the
            exhaustive simulator branches over control assignments.
    """
    if kind not in VERIFIER_KINDS:
        raise ValueError(f"unknown verifier kind {kind!r}")
    n, k = len(spec.alphabet), spec.rounds
    fx = dict(fixed or {})
    allowed = {"random_aborting": {"R", "H"}, "public_coin": {"H"}, "three_round": {"H"}}
    if kind in _COHERENT:
        if fx:
            raise ValueError("coherent kinds cannot pin control registers")
    elif set(fx) - allowed[kind]:
        raise ValueError(f"kind {kind} cannot pin {sorted(set(fx) - allowed[kind])}")

    regs: list[tuple[str, int]] = []
    if kind == "random_aborting":
        if eps is None:
            raise ValueError("the aborting kind needs a predicate density")
        eps = Fraction(eps)
        if not 0 <= eps <= 1:
            raise ValueError("predicate density outside [0, 1]")
        pdom = prefix_domain(spec.alphabet, k)
        if "R" not in fx:
            regs.append(("R", len(spec.randomness)))
        elif fx["R"] not in spec.randomness:
            raise ValueError("pinned randomness outside the protocol's coin space")
        if "H" not in fx:
            regs.append(("H", 2 ** len(pdom)))
        else:
            _check_table(fx["H"], pdom, (0, 1))
    elif kind == "superposition":
        if eps is None:
            raise ValueError("the coherent aborting kind needs a predicate density")
        eps = Fraction(eps)
        if not 0 < eps <= 1:
            raise ValueError("the adjusting rotation needs a density in (0, 1]")
        pdom = prefix_domain(spec.alphabet, k)
        regs += [("Cont", 2), ("R", len(spec.randomness)), ("H", 2 ** len(pdom))]
    elif kind == "superposition_efficient":
        if family is None:
            raise ValueError("the efficient kind needs a predicate family")
        if family.k != k or family.domain != prefix_domain(spec.alphabet, k):
            raise ValueError("family domain does not match the message prefixes")
        eps = family.epsilon
        regs += [("Cont", 2), ("R", len(spec.randomness)), ("K", family.key_count)]
    elif kind == "public_coin":
        if not spec.public_coin:
            raise ValueError(f"spec {spec.name} is not public-coin")
        challenges, _ = challenge_structure(spec, x)
        pdom = prefix_domain(spec.alphabet, k - 1)
        if "H" not in fx:
            regs.append(("H", len(challenges) ** len(pdom)))
        else:
            _check_table(fx["H"], pdom, challenges)
    else:  # three_round
        if k != 2:
            raise ValueError("the hashed-randomness kind needs exactly two moves")
        if "H" not in fx:
            regs.append(("H", len(spec.randomness) ** n))
        else:
            _check_table(fx["H"], spec.alphabet, spec.randomness)

    regs.append(("Count", k))
    regs += [(f"M{i}", n) for i in range(1, k + 1)]
    regs += [("B", 2), ("M", n)]
    layout = RegisterLayout(tuple(regs))
    if layout.total_dim > MAX_STATE_DIM:
        raise ValueError(
            f"machine dimension {layout.total_dim} exceeds the dense cap"
        )
    out = ("Cont", "B") if kind in _COHERENT else ("B",)
    return VerifierMachine(
        kind,
        spec,
        x,
        layout,
        out,
        eps=None if eps is None else Fraction(eps),
        family=family,
        fixed=tuple(sorted(fx.items(), key=lambda kv: kv[0])),
    )


def _check_table(table: ClassicalOracle, domain, range_values) -> None:
    if not isinstance(table, ClassicalOracle):
        raise TypeError("pinned tables must be classical oracles")
    if table.domain != tuple(domain):
        raise ValueError("pinned table domain mismatch")
    if set(table.values) - set(range_values):
        raise ValueError("pinned table values outside the expected range")


def apply_step(
    machine: VerifierMachine, state: StateVector, inverse: bool = False
) -> StateVector:
    """One verifier call (or its inverse) on a state led by machine registers."""
    lay = state.layout
    mreg = machine.layout.registers
    if lay.registers[: len(mreg)] != mreg:
        raise ValueError("machine registers must lead the combined layout")
    mdim = machine.layout.total_dim
    rows = state.amplitudes.reshape(-1, mdim)
    perm = machine._step_perm
    if inverse:
        rows = machine._apply_adjusters(rows.copy(), forward=False)
        rows = rows[:, perm]
    else:
        out = np.empty_like(rows)
        out[:, perm] = rows
        rows = machine._apply_adjusters(out, forward=True)
    return StateVector(lay, rows.reshape(-1))


def step_matrix(machine: VerifierMachine) -> np.ndarray:
    """Dense matrix of one verifier call (small machines only)."""
    mdim = machine.layout.total_dim
    if mdim > MAX_MATRIX_DIM:
        raise ValueError(f"dense step matrix capped at {MAX_MATRIX_DIM}")
    cols = np.zeros((mdim, mdim), dtype=complex)
    cols[machine._step_perm, np.arange(mdim)] = 1.0
    return machine._apply_adjusters(cols.T.copy(), forward=True).T.copy()


def is_step_unitary(machine: VerifierMachine, atol: float = ATOL_UNITARY) -> bool:
    """Unitarity certificate: permutation bijective, every adjuster unitary.

    Small machines additionally get the dense U*U check.
    """
    perm = machine._step_perm
    if not np.array_equal(np.sort(perm), np.arange(perm.size)):
        return False
    info = machine._adjuster_blocks
    if info is not None:
        for _, mat in info[4]:
            d = mat.shape[0]
            if np.abs(mat.conj().T @ mat - np.eye(d)).max() > atol:
                return False
    if machine.layout.total_dim <= MAX_MATRIX_DIM:
        u = step_matrix(machine)
        return bool(np.abs(u.conj().T @ u - np.eye(u.shape[0])).max() <= atol)
    return True


def fstar_oracle(
    machine: VerifierMachine, i_round: int, *, r=None, h=None
) -> ClassicalOracle:
    """The verifier's classical next-step function at one round.

    Rounds below k map message prefixes to the response added into M
    (the first alphabet letter doubles as the additive abort marker);
    round k maps full transcripts to the acceptance bit. Domains are
    ordered little-endian in the message digits, first message fastest,
    so tables line up with merged message registers under quantum_query.
    """
    spec, x, k = machine.spec, machine.x, machine.k
    n = len(spec.alphabet)
    if not 1 <= i_round <= k:
        raise ValueError(f"round {i_round} outside 1..{k}")
    r = machine.fixed_value("R") if r is None else r
    h = machine.fixed_value("H") if h is None else h
    if h is None:
        raise ValueError("need a pinned or supplied control table")
    dom = []
    for flat in range(n**i_round):
        digs = [(flat // n**j) % n for j in range(i_round)]
        dom.append(tuple(spec.alphabet[d] for d in digs))
    dom = tuple(dom)
    final = i_round == k
    kind = machine.kind

    def value(t: tuple):
        if kind in ("random_aborting",) + _COHERENT:
            if final:
                ok = all(h(p) for p in prefixes(t))
                return int(ok and bool(spec.decide(x, r, t)))
            return spec.next_message(x, r, t) if h(t) else spec.alphabet[0]
        if kind == "public_coin":
            if final:
                cs = tuple(h(t[:i]) for i in range(1, k))
                return int(bool(spec.decide(x, machine._challenges[1][cs], t)))
            return h(t)
        if final:
            return int(bool(spec.decide(x, h(t[0]), t)))
        return spec.next_message(x, h(t[0]), t)

    if kind in ("random_aborting",) + _COHERENT and r is None:
        raise ValueError("need pinned or supplied randomness")
    rng = (0, 1) if final else tuple(spec.alphabet)
    return ClassicalOracle(dom, rng, tuple(value(t) for t in dom))


@dataclass(frozen=True)
class AuxState:
    """A named auxiliary input: one amplitude factor per control register."""

    name: str
    factors: tuple[tuple[str, tuple[complex, ...]], ...]


_CANONICAL_AUX = {
    "random_aborting": "psi_eps",
    "superposition": "psi_tilde_eps",
    "superposition_efficient": "psi_q_key",
    "public_coin": "psi_q_key",
    "three_round": "psi_q_key",
}


def build_aux(machine: VerifierMachine, name: str | None = None) -> AuxState:
    """The kind's canonical auxiliary state over its control registers."""
    canonical = _CANONICAL_AUX[machine.kind]
    if name is not None and name != canonical:
        raise ValueError(f"kind {machine.kind} takes aux {canonical}, not {name}")
    factors = []
    for reg, dim in machine.layout.registers:
        if reg == "Cont":
            factors.append((reg, (1 / np.sqrt(2), 1 / np.sqrt(2))))
        elif reg in ("R", "K"):
            factors.append((reg, (1 / np.sqrt(dim),) * dim))
        elif reg == "H":
            if machine.kind in ("random_aborting", "superposition"):
                vec = table_superposition(
                    SparseOracleDist(machine._prefix_points, machine.eps)
                )
                factors.append((reg, tuple(complex(v) for v in vec)))
            else:
                factors.append((reg, (1 / np.sqrt(dim),) * dim))
    return AuxState(canonical, tuple(factors))


def initial_state(
    machine: VerifierMachine,
    aux: AuxState | None = None,
    work: Sequence[tuple[str, int]] = (),
) -> StateVector:
    """Auxiliary input on the control registers, zeros everywhere else."""
    if aux is None:
        aux = build_aux(machine)
    layout = RegisterLayout(machine.layout.registers + tuple(work))
    fax = dict(aux.factors)
    stray = set(fax) - set(layout.names)
    if stray:
        raise ValueError(f"aux names {sorted(stray)} missing from the layout")
    factors = {}
    for reg, dim in layout.registers:
        if reg in fax:
            factors[reg] = fax[reg]
        else:
            e0 = np.zeros(dim, dtype=complex)
            e0[0] = 1.0
            factors[reg] = e0
    return StateVector.from_product(layout, factors)


def _prover_move_matrices(spec: ProtocolSpec, x, witness, u) -> list[np.ndarray]:
    """The honest moves as message-register permutations (two moves max)."""
    if spec.rounds > 2:
        raise ValueError("dense interaction supports at most two prover moves")
    n = len(spec.alphabet)
    aidx = {a: i for i, a in enumerate(spec.alphabet)}
    first = np.eye(n)
    i1 = aidx[spec.honest_prover(x, witness, u, ())]
    if i1:
        first[[0, i1]] = first[[i1, 0]]
    mats = [first]
    if spec.rounds == 2:
        targets = [aidx[spec.honest_prover(x, witness, u, (a,))] for a in spec.alphabet]
        if len(set(targets)) != n:
            raise ValueError("honest second move is not a message permutation")
        second = np.zeros((n, n))
        second[targets, range(n)] = 1.0
        mats.append(second)
    return mats


def run_interaction(
    machine: VerifierMachine, witness, u=None, aux: AuxState | None = None
) -> StateVector:
    """Honest prover versus the machine, returning the joint final state.

    Prover moves act in place on M as permutations, so the interaction
    stays unitary under any control superposition.
    """
    spec = machine.spec
    u = spec.prover_randomness[0] if u is None else u
    st = initial_state(machine, aux)
    for mat in _prover_move_matrices(spec, machine.x, witness, u):
        st = apply_unitary(st, ["M"], mat)
        st = apply_step(machine, st)
    return st


def project_register(state: StateVector, register: str, value: int):
    """(probability, renormalized post-state) of one digit outcome."""
    for o, post, p in measure_register(state, register):
        if o == value:
            return p, post
    return 0.0, None


def accept_probability(state: StateVector) -> float:
    """Pr[B = 1] in a final joint state."""
    p, _ = project_register(state, "B", 1)
    return p


def cont_given_accept(state: StateVector):
    """(Pr[B=1], reduced Cont state conditioned on acceptance)."""
    p, post = project_register(state, "B", 1)
    if post is None:
        return 0.0, None
    return p, partial_trace(post, "Cont")


def final_cont_state(spec: ProtocolSpec, x, witness, eps, u=None):
    """Exact accept statistics of the coherent kind without the dense state.

    Works branch by classical branch over (r, u), tracking only the two
    predicate bits the interaction can reach; every other table point
    stays in the same product state in both control blocks and factors
    out. Two-move specs only, which keeps the reachable set at two.

    Returns:
        (Pr[B=1], reduced Cont state given B=1, Pr[Cont=1 | B=1]).
    """
    if spec.rounds != 2:
        raise ValueError("the reduced routine needs exactly two prover moves")
    eps = Fraction(eps)
    if not 0 < eps <= 1:
        raise ValueError("the adjusting rotation needs a density in (0, 1]")
    us = list(spec.prover_randomness) if u is None else [u]
    se, sne = np.sqrt(float(eps)), np.sqrt(float(1 - eps))
    s2 = np.sqrt(2.0)
    weight = 1.0 / (len(spec.randomness) * len(us))
    total = 0.0
    rho = np.zeros((2, 2), dtype=complex)
    for r in spec.randomness:
        for uu in us:
            m1 = spec.honest_prover(x, witness, uu, ())
            c = spec.next_message(x, r, (m1,))
            m2 = spec.honest_prover(x, witness, uu, (c,))
            m2_ab = spec.honest_prover(x, witness, uu, (spec.alphabet[0],))
            acc = int(bool(spec.decide(x, r, (m1, m2))))
            dist = SparseOracleDist(((m1,), (m1, m2)), eps)
            adj = build_exact_adjuster((m1, m2), dist).matrix @ table_superposition(dist)
            # amplitude per (Cont, bit at (m1,), bit at (m1, m2), second message, B)
            amps: dict[tuple, float] = {}
            for hflat in range(4):
                h1, h2 = hflat & 1, (hflat >> 1) & 1
                key = (0, h1, h2, m2, acc)
                amps[key] = amps.get(key, 0.0) + adj[hflat] / s2
                alpha = (se if h1 else sne) * (se if h2 else sne) / s2
                if h1:
                    key = (1, 1, h2, m2, h2 & acc)
                else:
                    key = (1, 0, h2, m2_ab, 0)
                amps[key] = amps.get(key, 0.0) + alpha
            rests: dict[tuple, list] = {}
            for (cont, h1, h2, mm, b), a in amps.items():
                if b != 1:
                    continue
                rests.setdefault((h1, h2, mm), [0.0, 0.0])[cont] += a
            for pair in rests.values():
                vec = np.array(pair, dtype=complex)
                rho += weight * np.outer(vec, vec.conj())
                total += weight * float((vec.conj() @ vec).real)
    if total <= PROB_FLOOR:
        return 0.0, None, 0.0
    rho /= total
    return total, DensityOnRegister("Cont", rho), float(rho[1, 1].real)


@dataclass(frozen=True)
class Unitary:
    """Free unitary on visible registers (first listed register fastest)."""

    registers: tuple[str, ...]
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "registers", tuple(self.registers))
        m = np.array(self.matrix, dtype=complex)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)


@dataclass(frozen=True)
class CallVerifier:
    """One verifier invocation; inverse applies the conjugate step."""

    inverse: bool = False


@dataclass(frozen=True)
class CallOracle:
    """One superposed query to a named classical table."""

    name: str
    in_register: str
    out_register: str


@dataclass(frozen=True)
class Measure:
    """Computational-basis measurement of one visible register."""

    register: str


Step = Union[Unitary, CallVerifier, CallOracle, Measure]


@dataclass(frozen=True)
class QueryAlgorithm:
    """A fixed step list under a strict invocation budget."""

    name: str
    steps: tuple[Step, ...]
    budget: int
    work_registers: tuple[tuple[str, int], ...] = ()
    output_registers: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "steps", tuple(self.steps))
        object.__setattr__(self, "work_registers", tuple(self.work_registers))
        object.__setattr__(self, "output_registers", tuple(self.output_registers))
        if self.budget < 0:
            raise ValueError("budgets are nonnegative")
        if self.invocations > self.budget:
            raise ValueError(
                f"budget violation in strict mode: {self.invocations} calls"
                f" against budget {self.budget}"
            )

    @property
    def invocations(self) -> int:
        return sum(isinstance(s, (CallVerifier, CallOracle)) for s in self.steps)


@dataclass(frozen=True)
class ExpectedAlgorithm:
    """A stopping-rule mixture of strict lists; the budget holds on average."""

    name: str
    branches: tuple[tuple[Fraction, QueryAlgorithm], ...]
    budget: int

    def __post_init__(self) -> None:
        br = tuple((Fraction(w), alg) for w, alg in self.branches)
        if not br or any(w <= 0 for w, _ in br):
            raise ValueError("branch weights must be positive")
        if sum(w for w, _ in br) != 1:
            raise ValueError("branch weights must sum to 1")
        object.__setattr__(self, "branches", br)
        if self.expected_invocations > Fraction(self.budget, 2):
            raise ValueError(
                f"expected invocations {self.expected_invocations} exceed"
                f" half the budget {self.budget}"
            )

    @property
    def expected_invocations(self) -> Fraction:
        return sum(w * alg.invocations for w, alg in self.branches)


@dataclass(frozen=True)
class RunBranch:
    """One execution branch: weight, joint state, live tables, outcomes."""

    weight: object
    state: StateVector
    oracles: tuple[tuple[str, ClassicalOracle], ...] = ()
    outcomes: tuple[tuple[str, int], ...] = ()
    invocations: int = 0
    counts: tuple[tuple[str, int], ...] = ()

    def oracle(self, name: str) -> ClassicalOracle:
        for nm, tab in self.oracles:
            if nm == name:
                return tab
        raise KeyError(f"no oracle named {name!r}")

    def count(self, name: str) -> int:
        for nm, c in self.counts:
            if nm == name:
                return c
        return 0


def _scale(weight, p: float):
    """Multiply a branch weight by a probability, keeping exact 0/1 exact."""
    if abs(p - 1.0) <= _EXACT_TOL:
        return weight
    return float(weight) * p


def _bump(branch: RunBranch, name: str) -> RunBranch:
    d = dict(branch.counts)
    d[name] = d.get(name, 0) + 1
    return replace(
        branch, invocations=branch.invocations + 1, counts=tuple(sorted(d.items()))
    )


def set_branch_oracle(branch: RunBranch, name: str, table: ClassicalOracle) -> RunBranch:
    """Branch copy whose named table is replaced (reprogramming)."""
    if name not in dict(branch.oracles):
        raise KeyError(f"no oracle named {name!r}")
    return replace(
        branch,
        oracles=tuple((nm, table if nm == name else t) for nm, t in branch.oracles),
    )


def answer_query(branch: RunBranch, call: CallOracle, table=None) -> RunBranch:
    """Answer one query from the branch's (or a supplied) table, bumping counts."""
    tab = branch.oracle(call.name) if table is None else table
    st = quantum_query(branch.state, tab, call.in_register, call.out_register)
    return replace(_bump(branch, call.name), state=st)


def measure_query_register(branch: RunBranch, call: CallOracle):
    """Collapse the query register, as (domain point, collapsed branch) pairs.

    The invocation count is not bumped; callers answer the query
    afterwards. Outcomes outside the table's domain encoding error out.
    """
    tab = branch.oracle(call.name)
    out = []
    for o, post, p in measure_register(branch.state, call.in_register):
        if o >= len(tab.domain):
            raise ValueError("measured a query outside the table domain")
        out.append(
            (
                tab.domain[o],
                replace(
                    branch,
                    state=post,
                    weight=_scale(branch.weight, p),
                    outcomes=branch.outcomes + ((call.in_register, o),),
                ),
            )
        )
    return out


def run_query_algorithm(
    alg: QueryAlgorithm,
    *,
    machine: VerifierMachine | None = None,
    aux: AuxState | None = None,
    oracles: Mapping[str, ClassicalOracle] | None = None,
    on_query: Callable[[RunBranch, CallOracle, int], Optional[list]] | None = None,
) -> list[RunBranch]:
    """Execute a step list exhaustively, returning every final branch.

    Args:
        alg: the algorithm (strict budget).
        machine: optional verifier; its registers lead the joint layout
            and only M among them is visible to the algorithm's steps.
        aux: auxiliary input for the machine's control registers.
        oracles: named classical tables serving CallOracle steps.
        on_query: interceptor f(branch, call, ordinal) returning
            replacement branches (already answered) or None for the
            default answer; ordinals count per oracle name from 1.

    Returns:
        Final branches; weights stay exact fractions until some
        measurement splits amplitude, and are floats after.
    """
    work = tuple(alg.work_registers)
    if machine is not None:
        clash = {nm for nm, _ in work} & set(machine.layout.names)
        if clash:
            raise ValueError(f"work registers {sorted(clash)} shadow the machine")
        visible = {nm for nm, _ in work} | {"M"}
        state = initial_state(machine, aux, work=work)
    else:
        if not work:
            raise ValueError("an algorithm without a machine needs work registers")
        visible = {nm for nm, _ in work}
        state = StateVector.basis(RegisterLayout(work))
    bad_out = set(alg.output_registers) - visible
    if bad_out:
        raise ValueError(f"output registers {sorted(bad_out)} are not visible")
    tables = tuple(sorted((oracles or {}).items()))
    branches = [RunBranch(Fraction(1), state, tables)]
    for step in alg.steps:
        nxt: list[RunBranch] = []
        for br in branches:
            if isinstance(step, Unitary):
                hidden = set(step.registers) - visible
                if hidden:
                    raise ValueError(
                        f"step touches verifier-internal registers {sorted(hidden)}"
                    )
                nxt.append(
                    replace(br, state=apply_unitary(br.state, step.registers, step.matrix))
                )
            elif isinstance(step, Measure):
                if step.register not in visible:
                    raise ValueError(
                        f"measurement touches verifier-internal register {step.register!r}"
                    )
                for o, post, p in measure_register(br.state, step.register):
                    nxt.append(
                        replace(
                            br,
                            state=post,
                            weight=_scale(br.weight, p),
                            outcomes=br.outcomes + ((step.register, o),),
                        )
                    )
            elif isinstance(step, CallVerifier):
                if machine is None:
                    raise ValueError("no verifier attached to this run")
                if br.invocations + 1 > alg.budget:
                    raise RuntimeError("budget violation in strict mode")
                st = apply_step(machine, br.state, inverse=step.inverse)
                nxt.append(replace(_bump(br, "verifier"), state=st))
            elif isinstance(step, CallOracle):
                if br.invocations + 1 > alg.budget:
                    raise RuntimeError("budget violation in strict mode")
                res = None
                if on_query is not None:
                    res = on_query(br, step, br.count(step.name) + 1)
                if res is None:
                    nxt.append(answer_query(br, step))
                else:
                    nxt.extend(res)
            else:
                raise TypeError(f"unknown step {step!r}")
        branches = nxt
    return branches


def output_distribution(branches: Sequence[RunBranch], registers: Sequence[str]):
    """Joint digit distribution of named registers over final branches."""
    out: dict[tuple[int, ...], object] = {}
    for br in branches:
        lay = br.state.layout
        t = br.state.tensor()
        axes = [lay.axis_of(r) for r in registers]
        probs = np.abs(t) ** 2
        marg = probs.sum(axis=tuple(a for a in range(t.ndim) if a not in axes))
        order = [sorted(axes).index(a) for a in axes]
        marg = np.transpose(marg, order)
        for idx in np.argwhere(marg > PROB_FLOOR):
            key = tuple(int(v) for v in idx)
            out[key] = out.get(key, 0) + _scale(br.weight, float(marg[tuple(idx)]))
    return out


@dataclass(frozen=True)
class SimulationResult:
    """All branches of one exhaustive simulator run."""

    kind: str
    branches: tuple[RunBranch, ...]


def _register_prob(state: StateVector, register: str, value: int) -> float:
    t = state.tensor()
    axis = state.layout.axis_of(register)
    probs = np.abs(t) ** 2
    marg = probs.sum(axis=tuple(a for a in range(t.ndim) if a != axis))
    return float(marg[value].real)


def pr_register(result: SimulationResult, register: str = "B", value: int = 1):
    """Mixture probability that a register reads ``value`` at the end.

    Exact (a Fraction) whenever every branch is classical in that
    register; a float as soon as genuine amplitude splitting occurred.
    """
    total = 0
    for br in result.branches:
        p = _register_prob(br.state, register, value)
        if p <= _EXACT_TOL:
            continue
        total = total + _scale(br.weight, p)
    return total


def pr_budget(result: SimulationResult, q: int):
    """Mixture probability of finishing within q invocations."""
    return sum((br.weight for br in result.branches if br.invocations <= q), start=0)


def pr_joint_budget(
    result: SimulationResult, q: int, register: str = "B", value: int = 1
):
    """Mixture probability of {within q invocations and register = value}."""
    total = 0
    for br in result.branches:
        if br.invocations > q:
            continue
        p = _register_prob(br.state, register, value)
        if p <= _EXACT_TOL:
            continue
        total = total + _scale(br.weight, p)
    return total


def cont_density(result: SimulationResult, register: str = "B", value: int = 1):
    """(probability, conditional reduced Cont state) across all branches."""
    num = np.zeros((2, 2), dtype=complex)
    den = 0.0
    for br in result.branches:
        p, post = project_register(br.state, register, value)
        if post is None:
            continue
        w = float(br.weight) * p
        num += w * partial_trace(post, "Cont").matrix
        den += w
    if den <= PROB_FLOOR:
        return 0.0, None
    return den, DensityOnRegister("Cont", num / den)


def transcript_distribution(result: SimulationResult, machine: VerifierMachine):
    """Joint distribution of the message slots, keyed by alphabet labels."""
    dist = output_distribution(result.branches, machine.message_registers)
    alpha = machine.spec.alphabet
    return {tuple(alpha[d] for d in key): w for key, w in dist.items()}


def run_simulator(
    sim: Union[QueryAlgorithm, ExpectedAlgorithm],
    machine: VerifierMachine,
    aux: AuxState | None = None,
    x=None,
    mode: str = "exhaustive",
    force_dense: bool = False,
) -> SimulationResult:
    """Exhaustive simulation: the exact output mixture of sim vs machine.

    Kinds whose control registers commute with every simulator-visible
    action are computed one classical control assignment at a time
    (each a pinned machine) and mixed with exact weights; the coherent
    kinds run fully dense. Expected-mode simulators contribute each
    strict branch with its stopping weight.
    """
    if mode != "exhaustive":
        raise ValueError(f"unknown simulation mode {mode!r}")
    if x is not None and x != machine.x:
        raise ValueError("statement mismatch between call and machine")
    if aux is not None and aux.name != _CANONICAL_AUX[machine.kind]:
        raise ValueError(f"aux {aux.name} does not fit kind {machine.kind}")
    if isinstance(sim, ExpectedAlgorithm):
        allb: list[RunBranch] = []
        for w, alg in sim.branches:
            sub = run_simulator(alg, machine, aux=aux, force_dense=force_dense)
            allb.extend(replace(b, weight=w * b.weight) for b in sub.branches)
        return SimulationResult(machine.kind, tuple(allb))
    kind = machine.kind
    if force_dense or kind in _COHERENT or machine.fixed:
        branches = run_query_algorithm(sim, machine=machine, aux=aux)
        return SimulationResult(kind, tuple(branches))
    spec, xx = machine.spec, machine.x
    assignments: list[tuple[dict, Fraction]] = []
    if kind == "random_aborting":
        dist = SparseOracleDist(machine._prefix_points, machine.eps)
        rw = Fraction(1, len(spec.randomness))
        for r in spec.randomness:
            for h, w in dist.enumerate_weighted():
                assignments.append(({"R": r, "H": h}, rw * w))
    elif kind == "public_coin":
        challenges, _ = machine._challenges
        pts = machine._prefix_points
        w = Fraction(1, len(challenges) ** len(pts))
        for vals in itertools.product(challenges, repeat=len(pts)):
            assignments.append(({"H": ClassicalOracle(pts, challenges, vals)}, w))
    else:  # three_round
        rs = spec.randomness
        alpha = tuple(spec.alphabet)
        w = Fraction(1, len(rs) ** len(alpha))
        for vals in itertools.product(rs, repeat=len(alpha)):
            assignments.append(({"H": ClassicalOracle(alpha, rs, vals)}, w))
    allb = []
    for fx, w in assignments:
        pinned = build_verifier(kind, spec, xx, eps=machine.eps, fixed=fx)
        for b in run_query_algorithm(sim, machine=pinned):
            allb.append(replace(b, weight=w * b.weight))
    return SimulationResult(kind, tuple(allb))


def _swap0(n: int, i: int) -> np.ndarray:
    m = np.eye(n)
    if i:
        m[[0, i]] = m[[i, 0]]
    return m


def honest_wrapper(machine: VerifierMachine, witness, u=None) -> QueryAlgorithm:
    """The honest prover phrased as a strict k-call simulator."""
    spec = machine.spec
    u = spec.prover_randomness[0] if u is None else u
    steps: list[Step] = []
    for mat in _prover_move_matrices(spec, machine.x, witness, u):
        steps.append(Unitary(("M",), mat))
        steps.append(CallVerifier())
    return QueryAlgorithm("honest-wrapper", tuple(steps), budget=spec.rounds)


def give_up(machine: VerifierMachine, transcript: tuple | None = None) -> QueryAlgorithm:
    """Sends a fixed transcript and never adapts to any response."""
    spec = machine.spec
    n, k = len(spec.alphabet), spec.rounds
    if k > 2:
        raise ValueError("the fixed-transcript sender supports at most two moves")
    ms = tuple(transcript) if transcript is not None else (spec.alphabet[0],) * k
    if len(ms) != k:
        raise ValueError(f"transcript length {len(ms)} != {k}")
    aidx = {a: i for i, a in enumerate(spec.alphabet)}
    steps: list[Step] = [Unitary(("M",), _swap0(n, aidx[ms[0]])), CallVerifier()]
    work: tuple[tuple[str, int], ...] = ()
    if k == 2:
        shelve = np.zeros((n * n, n * n))
        for m in range(n):
            for w in range(n):
                shelve[w + n * m, m + n * w] = 1.0
        steps += [
            Unitary(("M", "W1"), shelve),
            Unitary(("M",), _swap0(n, aidx[ms[1]])),
            CallVerifier(),
        ]
        work = (("W1", n),)
    return QueryAlgorithm("give-up", tuple(steps), budget=k, work_registers=work)


def classical_rewinder(machine: VerifierMachine, witness, u=None) -> QueryAlgorithm:
    """Honest flavor that measures the message register after every call."""
    spec = machine.spec
    u = spec.prover_randomness[0] if u is None else u
    steps: list[Step] = []
    for mat in _prover_move_matrices(spec, machine.x, witness, u):
        steps += [Unitary(("M",), mat), CallVerifier(), Measure("M")]
    return QueryAlgorithm("classical-rewinder", tuple(steps), budget=spec.rounds)


def grover_flavored(machine: VerifierMachine) -> QueryAlgorithm:
    """Two plain calls with message-register mixing between them."""
    spec = machine.spec
    if spec.rounds != 1 or len(spec.alphabet) != 2:
        raise ValueError("the mixing probe needs one round and a binary alphabet")
    h = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2)
    steps = (Unitary(("M",), h), CallVerifier(), Unitary(("M",), h), CallVerifier())
    return QueryAlgorithm("grover-flavored", steps, budget=2)


def expected_wrappers(
    machine: VerifierMachine, witness, q: int, u=None
) -> tuple[ExpectedAlgorithm, ...]:
    """Expected-budget honest variants; padded call pairs cancel exactly.

    Each member's strict lists prepend i forward/inverse call pairs to
    the honest wrapper, so the interaction statistics are untouched
    while the invocation count distribution becomes nontrivial.
    """
    base = honest_wrapper(machine, witness, u)
    k = machine.spec.rounds

    def padded(i: int) -> QueryAlgorithm:
        pads = (CallVerifier(), CallVerifier(inverse=True)) * i
        return QueryAlgorithm(f"honest-padded-{i}", pads + base.steps, budget=k + 2 * i)

    members = [ExpectedAlgorithm("expected-honest", ((Fraction(1), base),), q)]
    spare = (q - 2 * k) // 2
    if spare >= 0:
        members.append(
            ExpectedAlgorithm(
                "expected-lazy",
                ((Fraction(1, 2), base), (Fraction(1, 2), padded(spare))),
                q,
            )
        )
    weights = [Fraction(1, 2 ** (i + 1)) for i in range(4)] + [Fraction(1, 16)]
    members.append(
        ExpectedAlgorithm(
            "expected-geometric",
            tuple((w, padded(i)) for i, w in enumerate(weights)),
            q,
        )
    )
    return tuple(members)


def optimize_small_circuits(
    machine: VerifierMachine,
    gates: Mapping[str, np.ndarray] | None = None,
    max_queries: int = 2,
):
    """Exhaustive argmax of Pr[B=1] over tiny interleaved-gate circuits.

    Enumerates every g_0, call, g_1, ..., with at most ``max_queries``
    plain calls and gates drawn from ``gates`` acting on M; ties break
    on enumeration order, so the result is deterministic.
    """
    spec = machine.spec
    if spec.rounds != 1 or len(spec.alphabet) != 2:
        raise ValueError("circuit search is limited to one round, binary alphabet")
    if gates is None:
        s = 1 / np.sqrt(2)
        gates = {
            "i": np.eye(2),
            "x": np.array([[0.0, 1.0], [1.0, 0.0]]),
            "h": np.array([[s, s], [s, -s]]),
            "zh": np.array([[s, s], [-s, s]]),
        }
    names = sorted(gates)
    best_val = None
    best_alg = None
    for nq in range(max_queries + 1):
        for combo in itertools.product(names, repeat=nq + 1):
            steps: list[Step] = [Unitary(("M",), gates[combo[0]])]
            for g in combo[1:]:
                steps += [CallVerifier(), Unitary(("M",), gates[g])]
            alg = QueryAlgorithm("circuit-" + "".join(combo), tuple(steps), budget=nq)
            val = float(pr_register(run_simulator(alg, machine)))
            if best_val is None or val > best_val + 1e-12:
                best_val, best_alg = val, alg
    return best_alg, best_val


def _prep_column(dim: int, vec) -> np.ndarray:
    """A real reflection sending basis state 0 to the given unit vector."""
    v = np.asarray(vec, dtype=float)
    v = v / np.linalg.norm(v)
    e0 = np.zeros(dim)
    e0[0] = 1.0
    u = e0 - v
    nrm = np.linalg.norm(u)
    if nrm < 1e-12:
        return np.eye(dim)
    u = u / nrm
    return np.eye(dim) - 2.0 * np.outer(u, u)


def oracle_zoo(domain: Sequence[Hashable], name: str = "h") -> tuple[QueryAlgorithm, ...]:
    """Strict algorithms against one named binary table.

    Covers the shapes the reprogramming and puncturing arguments care
    about: no queries, classical point queries (plain, second-point,
    and adaptive), one uniform superposed query, and a two-query phase
    circuit whose output is sensitive to when answers change.
    """
    big = len(domain)
    s = 1 / np.sqrt(big)
    s2 = 1 / np.sqrt(2)
    uni = _prep_column(big, [s] * big)
    minus = np.array([[s2, s2], [-s2, s2]])
    diff = 2.0 * np.full((big, big), 1.0 / big) - np.eye(big)
    q, a = ("Q", big), ("A", 2)
    q2, a2 = ("Q2", big), ("A2", 2)
    members = [
        QueryAlgorithm(
            "oq-none", (Unitary(("Q",), np.eye(big)),), 0, (q,), ("Q",)
        ),
        QueryAlgorithm(
            "oq-classical", (CallOracle(name, "Q", "A"),), 1, (q, a), ("Q", "A")
        ),
        QueryAlgorithm(
            "oq-classical-second",
            (Unitary(("Q",), _swap0(big, min(1, big - 1))), CallOracle(name, "Q", "A")),
            1,
            (q, a),
            ("Q", "A"),
        ),
        QueryAlgorithm(
            "oq-uniform",
            (Unitary(("Q",), uni), CallOracle(name, "Q", "A")),
            1,
            (q, a),
            ("Q",),
        ),
        QueryAlgorithm(
            "oq-phase",
            (
                Unitary(("A",), minus),
                Unitary(("Q",), uni),
                CallOracle(name, "Q", "A"),
                Unitary(("Q",), diff),
                CallOracle(name, "Q", "A"),
                Unitary(("A",), minus.conj().T),
            ),
            2,
            (q, a),
            ("Q",),
        ),
    ]
    if big >= 3:
        hop = np.zeros((2 * big, 2 * big))
        for bit in range(2):
            perm = _swap0(big, (1 + bit) % big)
            for col in range(big):
                row = int(np.argmax(perm[:, col]))
                hop[bit + 2 * row, bit + 2 * col] = 1.0
        members.append(
            QueryAlgorithm(
                "oq-adaptive",
                (
                    CallOracle(name, "Q", "A"),
                    Unitary(("A", "Q2"), hop),
                    CallOracle(name, "Q2", "A2"),
                ),
                2,
                (q, a, q2, a2),
                ("Q2", "A2"),
            )
        )
    return tuple(members)


def ordered_zoo(alphabet: Sequence[Hashable], name: str = "h") -> tuple[QueryAlgorithm, ...]:
    """Query algorithms over a prefix-closed two-round domain.

    The inconsistent member queries a singleton prefix and then a pair
    that does not extend it, so any schedule measuring both slots
    produces prefix-inconsistent outcomes by construction.
    """
    if len(alphabet) < 2:
        raise ValueError("need at least two letters")
    dom = prefix_domain(alphabet, 2)
    big, n = len(dom), len(alphabet)
    pidx = {p: i for i, p in enumerate(dom)}
    s = 1 / np.sqrt(big)
    uni = _prep_column(big, [s] * big)
    q1, a1 = ("Q1", big), ("A1", 2)
    q2, a2 = ("Q2", big), ("A2", 2)
    o1, o2 = ("O1", n), ("O2", n)

    def prep(reg, i):
        return Unitary((reg,), _swap0(n if reg.startswith("O") else big, i))

    consistent = QueryAlgorithm(
        "ord-classical",
        (
            prep("Q1", pidx[(alphabet[0],)]),
            CallOracle(name, "Q1", "A1"),
            prep("Q2", pidx[(alphabet[0], alphabet[1])]),
            CallOracle(name, "Q2", "A2"),
            prep("O2", 1),
        ),
        2,
        (q1, a1, q2, a2, o1, o2),
        ("O1", "O2"),
    )
    inconsistent = QueryAlgorithm(
        "ord-inconsistent",
        (
            prep("Q1", pidx[(alphabet[0],)]),
            CallOracle(name, "Q1", "A1"),
            prep("Q2", pidx[(alphabet[1], alphabet[0])]),
            CallOracle(name, "Q2", "A2"),
            prep("O1", 1),
        ),
        2,
        (q1, a1, q2, a2, o1, o2),
        ("O1", "O2"),
    )
    superposed = QueryAlgorithm(
        "ord-superposition",
        (
            Unitary(("Q1",), uni),
            CallOracle(name, "Q1", "A1"),
            prep("O2", 1),
        ),
        1,
        (q1, a1, o1, o2),
        ("O1", "O2"),
    )
    silent = QueryAlgorithm(
        "ord-none", (prep("O2", 1),), 0, (o1, o2), ("O1", "O2")
    )
    return (consistent, inconsistent, superposed, silent)
