"""Quantum states, adaptive measurement sequences and the sequential Born
rule, with the Werner-state filtering protocol and the GHZ construction.

Probabilities are computed in double precision.  A party's steps are
described by :class:`MeasurementStep` objects whose Kraus operators may
depend on the party's earlier settings and outcomes.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from .core import (FLOAT, RATIONAL, Scenario, SequentialCorrelations, free_parameters, postselect,
                   require_sequential, uniform)
from .polytopes.functionals import BellFunctional, chsh_values, sequential_chsh

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-10
COMPLETENESS_TOL = 1e-12


class QuantumError(ValueError):
    """An operator or state violates a required property."""


class RationalizationError(ArithmeticError):
    """Rounding moved some entry further than the allowed cap."""


# ------------------------------------------------------------------ states

@dataclass(frozen=True)
class DensityMatrix:
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise QuantumError("a density matrix must be square")
        if np.max(np.abs(m - m.conj().T), initial=0.0) > HERMITIAN_TOL:
            raise QuantumError("density matrix is not Hermitian")
        if abs(np.trace(m) - 1) > TRACE_TOL:
            raise QuantumError(f"density matrix has trace {np.trace(m).real:.3g}")
        m = (m + m.conj().T) / 2
        lo = float(np.linalg.eigvalsh(m).min())
        if lo < -PSD_TOL:
            raise QuantumError(f"density matrix has eigenvalue {lo:.3g}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    @classmethod
    def from_vector(cls, psi) -> "DensityMatrix":
        psi = np.asarray(psi, dtype=complex)
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()))


def flip_operator(d: int) -> np.ndarray:
    """The swap ``F = sum_ij |i><j| (x) |j><i|`` on ``C^d (x) C^d``."""
    F = np.zeros((d * d, d * d))
    for i, j in itertools.product(range(d), repeat=2):
        F[i * d + j, j * d + i] = 1
    return F


def werner_state(d: int, p: float) -> DensityMatrix:
    """Mixture of the normalized symmetric (weight ``p``) and antisymmetric
    projectors on ``C^d (x) C^d``."""
    if int(d) != d or d < 2:
        raise ValueError("the local dimension must be an integer >= 2")
    if not 0 <= p <= 1:
        raise ValueError("the weight p must lie in [0, 1]")
    d = int(d)
    eye, F = np.eye(d * d), flip_operator(d)
    return DensityMatrix(p * (eye + F) / (d * (d + 1)) + (1 - p) * (eye - F) / (d * (d - 1)))


def singlet(d: int = 2, i: int = 0, j: int = 1) -> np.ndarray:
    """``(|i>|j> - |j>|i>)/sqrt 2`` in ``C^d (x) C^d``."""
    psi = np.zeros(d * d)
    psi[i * d + j] = 1
    psi[j * d + i] = -1
    return psi / math.sqrt(2)


# ------------------------------------------------------------ measurements

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def bloch_observable(theta: float) -> np.ndarray:
    """``cos(theta) Z + sin(theta) X``."""
    return math.cos(theta) * PAULI_Z + math.sin(theta) * PAULI_X


def spectral_projectors(observable: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Projectors onto the +1 and -1 eigenspaces of a +-1 valued observable."""
    eye = np.eye(observable.shape[0])
    return (eye + observable) / 2, (eye - observable) / 2


History = tuple  # ((setting, outcome), ...) of the party's earlier steps


@dataclass(frozen=True)
class MeasurementStep:
    """One step of a party's sequence.

    ``kraus(setting, history)`` returns one operator per outcome; outcome 0
    is listed first.  ``history`` holds the earlier ``(setting, outcome)``
    pairs of the same party.
    """

    settings: int
    outcomes: int
    kraus: Callable[[int, History], list]
    projective: bool = True

    def operators(self, setting: int, history: History) -> list[np.ndarray]:
        ops = [np.asarray(k, dtype=complex) for k in self.kraus(setting, history)]
        if len(ops) != self.outcomes:
            raise QuantumError(f"{len(ops)} Kraus operators for {self.outcomes} outcomes")
        return ops


def fixed_step(measurements) -> MeasurementStep:
    """A history-independent step; ``measurements[x]`` lists the Kraus
    operators of setting ``x``."""
    ms = [list(m) for m in measurements]
    return MeasurementStep(len(ms), len(ms[0]), lambda x, h: ms[x])


def observable_step(observables) -> MeasurementStep:
    """A history-independent two-outcome step from +-1 valued observables."""
    return fixed_step([spectral_projectors(np.asarray(o, dtype=complex)) for o in observables])


def _histories(steps, upto: int):
    """All ``(setting, outcome)`` histories of the first ``upto`` steps."""
    choices = [list(itertools.product(range(s.settings), range(s.outcomes))) for s in steps[:upto]]
    return itertools.product(*choices)


def check_step(step: MeasurementStep, steps, position: int, dim: int) -> None:
    """Completeness (and idempotence when projective) for every history."""
    eye = np.eye(dim)
    for hist in _histories(steps, position):
        for x in range(step.settings):
            ops = step.operators(x, hist)
            for k in ops:
                if k.shape != (dim, dim):
                    raise QuantumError(f"operator of shape {k.shape} on a {dim}-dimensional subsystem")
            total = sum(k.conj().T @ k for k in ops)
            if np.max(np.abs(total - eye)) > COMPLETENESS_TOL:
                raise QuantumError(f"step {position + 1} is not complete at setting {x}, history {hist}")
            if step.projective:
                for k in ops:
                    if (np.max(np.abs(k @ k - k)) > COMPLETENESS_TOL
                            or np.max(np.abs(k - k.conj().T)) > COMPLETENESS_TOL):
                        raise QuantumError(f"step {position + 1} is flagged projective but is not")


@dataclass(frozen=True)
class QuantumSetup:
    """A state on ``C^dim_a (x) C^dim_b`` and the two parties' sequences."""

    state: DensityMatrix
    dim_a: int
    dim_b: int
    a_steps: tuple[MeasurementStep, ...]
    b_steps: tuple[MeasurementStep, ...]

    def __post_init__(self):
        object.__setattr__(self, "a_steps", tuple(self.a_steps))
        object.__setattr__(self, "b_steps", tuple(self.b_steps))
        if self.state.dimension != self.dim_a * self.dim_b:
            raise QuantumError(f"state of dimension {self.state.dimension} on a "
                               f"{self.dim_a}x{self.dim_b} bipartition")
        if not self.a_steps or not self.b_steps:
            raise QuantumError("each party needs at least one step")
        for steps, dim in ((self.a_steps, self.dim_a), (self.b_steps, self.dim_b)):
            for j, st in enumerate(steps):
                check_step(st, steps, j, dim)

    @property
    def scenario(self) -> Scenario:
        return Scenario(tuple(s.settings for s in self.a_steps), tuple(s.settings for s in self.b_steps),
                        tuple(s.outcomes for s in self.a_steps), tuple(s.outcomes for s in self.b_steps))


def _chains(steps):
    """Composite Kraus operator ``K_last ... K_first`` per (settings, outcomes)."""
    chains = {}
    settings = [range(s.settings) for s in steps]
    outcomes = [range(s.outcomes) for s in steps]
    for xs in itertools.product(*settings):
        for outs in itertools.product(*outcomes):
            hist: tuple = ()
            op = None
            for st, x, o in zip(steps, xs, outs):
                k = st.operators(x, hist)[o]
                op = k if op is None else k @ op
                hist = hist + ((x, o),)
            chains[xs, outs] = op
    return chains


def sequential_born(setup: QuantumSetup, order: str = "AB") -> SequentialCorrelations:
    """``P(a b | x y) = Tr[(K_A (x) K_B) rho (K_A (x) K_B)^dagger]``.

    ``order`` chooses which party's conjugation is applied to the state
    first; the two orders agree because the factors act on different
    subsystems.
    """
    if order not in ("AB", "BA"):
        raise ValueError("order must be 'AB' or 'BA'")
    sc = setup.scenario
    rho = setup.state.matrix
    da, db = setup.dim_a, setup.dim_b
    ka, kb = _chains(setup.a_steps), _chains(setup.b_steps)
    ia, ib = np.eye(da), np.eye(db)
    out = np.zeros(sc.shape)
    s, t = sc.s, sc.t
    first, second = (ka, kb) if order == "AB" else (kb, ka)
    for (xs1, o1), k1 in first.items():
        lift1 = np.kron(k1, ib) if order == "AB" else np.kron(ia, k1)
        r1 = lift1 @ rho @ lift1.conj().T
        for (xs2, o2), k2 in second.items():
            effect = k2.conj().T @ k2
            lift2 = np.kron(ia, effect) if order == "AB" else np.kron(effect, ib)
            pr = float(np.real(np.trace(lift2 @ r1)))
            if order == "AB":
                xs, ys, as_, bs = xs1, xs2, o1, o2
            else:
                xs, ys, as_, bs = xs2, xs1, o2, o1
            out[xs + ys + as_ + bs] = pr
    # clip rounding noise below zero; the tolerance check below still applies
    out[(out < 0) & (out > -PSD_TOL)] = 0.0
    P = SequentialCorrelations(sc, out, FLOAT, 1e-10)
    require_sequential(P)
    return P


def post_measurement_state(setup: QuantumSetup, a_history, b_history) -> np.ndarray:
    """Normalized state after the given ``(setting, outcome)`` histories."""
    ka = np.eye(setup.dim_a, dtype=complex)
    hist: tuple = ()
    for st, (x, o) in zip(setup.a_steps, a_history):
        ka = st.operators(x, hist)[o] @ ka
        hist += ((x, o),)
    kb = np.eye(setup.dim_b, dtype=complex)
    hist = ()
    for st, (y, o) in zip(setup.b_steps, b_history):
        kb = st.operators(y, hist)[o] @ kb
        hist += ((y, o),)
    k = np.kron(ka, kb)
    r = k @ setup.state.matrix @ k.conj().T
    tr = np.real(np.trace(r))
    if tr <= 0:
        raise QuantumError("the history has probability zero")
    return r / tr


def partial_trace(matrix: np.ndarray, dims, keep) -> np.ndarray:
    """Trace out every tensor factor not listed in ``keep``."""
    n = len(dims)
    t = matrix.reshape(tuple(dims) * 2)
    letters = "abcdefghijklmnopqrstuvwxyz"
    row, col = list(letters[:n]), list(letters[n:2 * n])
    for i in range(n):
        if i not in keep:
            col[i] = row[i]
    expr = "".join(row + col) + "->" + "".join([row[i] for i in keep] + [col[i] for i in keep])
    d = math.prod(dims[i] for i in keep)
    return np.einsum(expr, t).reshape(d, d)


# ------------------------------------------------------ filtering protocol

def _embedded(op2: np.ndarray, d: int, levels=(0, 1)) -> np.ndarray:
    out = np.zeros((d, d), dtype=complex)
    for i, li in enumerate(levels):
        for j, lj in enumerate(levels):
            out[li, lj] = op2[i, j]
    return out


# Singlet-optimal CHSH observables on the two retained levels
POPESCU_A_ANGLES = (0.0, math.pi / 2)
POPESCU_B_ANGLES = (-3 * math.pi / 4, 3 * math.pi / 4)


def popescu_setup(d: int) -> QuantumSetup:
    """Werner state at ``p = (1+d)/(2d^2)``; each party first projects onto
    the span of the first two levels, then measures a CHSH observable on
    that span or, after the complement outcome, the third level."""
    if int(d) != d or d < 3:
        raise ValueError("the filtering protocol needs local dimension d >= 3")
    d = int(d)
    rho = werner_state(d, (1 + d) / (2 * d * d))
    proj = np.zeros((d, d), dtype=complex)
    proj[0, 0] = proj[1, 1] = 1
    filt = fixed_step([[proj, np.eye(d) - proj]])
    third = np.zeros((d, d), dtype=complex)
    third[2, 2] = 1

    def second(angles):
        kept = []
        for th in angles:
            plus = _embedded(spectral_projectors(bloch_observable(th))[0], d)
            kept.append([plus, np.eye(d) - plus])
        rest = [third, np.eye(d) - third]

        def kraus(x, hist):
            return kept[x] if hist[0][1] == 0 else rest
        return MeasurementStep(2, 2, kraus)

    return QuantumSetup(rho, d, d, (filt, second(POPESCU_A_ANGLES)), (filt, second(POPESCU_B_ANGLES)))


def popescu_branch_state_closed_form(d: int) -> np.ndarray:
    psi = singlet(2)
    return d / (d + 2) * (np.eye(4) / (2 * d) + np.outer(psi, psi))


def popescu_protocol(d: int):
    """Returns ``(P, beta, branch_state)``.

    ``beta`` is the CHSH value ``<A0B0> + <A0B1> + <A1B0> - <A1B1>`` after
    both filters succeed and ``branch_state`` the 4x4 state on the two
    retained levels of each side.
    """
    setup = popescu_setup(d)
    P = sequential_born(setup)
    Q, _ = postselect(P, "A", 0, 0)
    R, _ = postselect(Q, "B", 0, 0)
    box = R.values.reshape(2, 2, 2, 2)
    beta = 0.0
    for (x, y), s in zip(itertools.product(range(2), repeat=2), (1, 1, 1, -1)):
        beta += s * sum((-1) ** (a + b) * box[x, y, a, b] for a, b in itertools.product(range(2), repeat=2))
    full = post_measurement_state(setup, [(0, 0)], [(0, 0)])
    keep = [0, 1]
    idx = [i * d + j for i in keep for j in keep]
    branch = full[np.ix_(idx, idx)]
    return P, float(beta), branch


def popescu_closed_form(d: int) -> float:
    return 2 * math.sqrt(2) * d / (d + 2)


# ------------------------------------------------------------- GHZ example

GHZ_A_ANGLES = (math.pi / 2, -math.pi)
GHZ_B1_ANGLES = (math.pi / 2, math.pi / 2)
# second-step angle indexed by (b1, y1, y2)
GHZ_B2_ANGLES = {
    (0, 0, 1): math.pi / 4, (0, 1, 0): -math.pi / 4, (1, 1, 0): math.pi / 4, (1, 1, 1): math.pi / 4,
    (1, 0, 0): 3 * math.pi / 4, (1, 0, 1): 3 * math.pi / 4,
    (0, 0, 0): math.pi / 3, (0, 1, 1): -math.pi / 3,
}


def ghz_setup() -> QuantumSetup:
    """A holds qubit 1 with one step; B measures qubit 2 then qubit 3 with
    an observable chosen by ``(b1, y1, y2)``."""
    psi = np.zeros(8)
    psi[0] = psi[7] = 1
    rho = DensityMatrix.from_vector(psi)
    eye2 = np.eye(2)
    a_step = observable_step([bloch_observable(t) for t in GHZ_A_ANGLES])
    b1_step = fixed_step([[np.kron(p, eye2) for p in spectral_projectors(bloch_observable(t))]
                          for t in GHZ_B1_ANGLES])
    proj2 = {k: [np.kron(eye2, p) for p in spectral_projectors(bloch_observable(t))]
             for k, t in GHZ_B2_ANGLES.items()}

    def kraus(y2, hist):
        (y1, b1), = hist
        return proj2[b1, y1, y2]

    b2_step = MeasurementStep(2, 2, kraus)
    return QuantumSetup(rho, 2, 4, (a_step,), (b1_step, b2_step))


@dataclass(frozen=True)
class GhzReport:
    beta: float
    conditioned_chsh: dict
    """largest CHSH value of each ``(y1, b1)`` post-selection"""
    bell_local: bool | None
    max_perturbation: float | None

    def to_json(self) -> dict:
        return {"beta": self.beta,
                "conditioned_chsh": [{"y1": y1, "b1": b1, "chsh": v}
                                     for (y1, b1), v in sorted(self.conditioned_chsh.items())],
                "bell_local": self.bell_local, "max_perturbation": self.max_perturbation}


def conditioned_chsh(P: SequentialCorrelations) -> dict:
    """Largest CHSH value of the normalized box at each ``(y1, b1)``."""
    out = {}
    v = P.values
    for y1, b1 in itertools.product(range(2), repeat=2):
        prob = sum(v[0, y1, 0, a, b1, b2] for a, b2 in itertools.product(range(2), repeat=2))
        box = [v[x, y1, y2, a, b1, b2] / prob for x, y2, a, b2 in itertools.product(range(2), repeat=4)]
        out[y1, b1] = float(max(chsh_values(box)))
    return out


def ghz_example(check_bell_local: bool = True, denominator_bound: int = 10 ** 6):
    """Returns ``(P, report)`` for the GHZ construction.

    The Bell-local check of the A|B coarse graining runs on the
    rationalized tensor.
    """
    P = sequential_born(ghz_setup())
    beta = float(sequential_chsh().value(P))
    bell = pert = None
    if check_bell_local:
        from .polytopes.membership import member_bell_local
        R, pert = rationalize(P, denominator_bound)
        bell = member_bell_local(R).member
    return P, GhzReport(beta, conditioned_chsh(P), bell, pert)


# ---------------------------------------------------------- rationalizing

def rationalize(P: SequentialCorrelations, denominator_bound: int, cap: float = 1e-6):
    """Exact sequential correlations close to floating ``P``.

    The free parameters of ``P`` (joint prefix marginals) are rounded to
    the nearest fractions with denominator at most ``denominator_bound``,
    so normalization and the arrow-of-time conditions hold exactly.  If
    rounding leaves a negative entry the result is mixed with the uniform
    box just enough to repair it.  Returns ``(Q, max_perturbation)``.
    """
    if int(denominator_bound) != denominator_bound or denominator_bound < 1:
        raise ValueError("the denominator bound must be a positive integer")
    require_sequential(P)
    fp = free_parameters(P.scenario)
    if P.exact:
        return P, 0.0
    theta = fp.extract(P)
    params = [Fraction(float(v)).limit_denominator(int(denominator_bound)) for v in theta]
    exact = fp.tensor(params, RATIONAL)
    low = min(exact)
    if low < 0:
        u = uniform(P.scenario).flat()
        # smallest eps with (1-eps) p_i + eps u_i >= 0 for all i, rounded up
        need = max(-p / (ui - p) for p, ui in zip(exact, u) if p < 0)
        eps = Fraction(math.ceil(need * denominator_bound), int(denominator_bound))
        exact = np.array([(1 - eps) * p + eps * ui for p, ui in zip(exact, u)], dtype=object)
    Q = SequentialCorrelations(P.scenario, exact, RATIONAL)
    require_sequential(Q)
    pert = float(np.max(np.abs(Q.to_float().flat() - P.flat())))
    if pert > cap:
        raise RationalizationError(f"rounding moved an entry by {pert:.3g} (cap {cap:g}); "
                                   "increase the denominator bound")
    return Q, pert
