"""Channel sequences, convergence defects, and the standard counterexamples.

A :class:`ChannelSequence` pairs a limit channel with a lazy rule for its
terms (index 1 and up; index 0 returns the limit).  Defects compare a term
against the limit over finite test families:

* ``strong_defect``: worst trace-norm disagreement on test states.
* ``weak_defect``: worst expectation-value disagreement on states and
  observables.
* ``strongstar_defect``: worst Euclidean disagreement of the dual maps on
  observables applied to test vectors.  This is the quantity that also
  controls the duals, hence "strong*": it can stay large while every
  per-state strong defect dies out, and the swap family below realizes
  exactly that separation.
* ``choi_defect``: ``trace_norm(J(term) - J(limit)) / d_in``, a lower bound
  on the completely bounded (diamond) distance.  Being a lower bound it can
  undershoot a strong defect measured at a well-chosen state; reports carry
  the comparison as a diagnostic rather than an invariant.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from ._parallel import pmap
from .core import (
    DensityOperator,
    KrausChannel,
    Observable,
    PartialIsometry,
    StinespringIsometry,
    ValidationError,
    choi_matrix,
    compose_channels,
    dagger,
    opnorm,
    ordered_eigh,
    channel_action,
    dual_action,
    tensor_channels,
    trace_norm,
)
from .dilation import (
    complementary_kraus,
    kraus_from_isometry,
    minimal_stinespring,
    pad_environment,
)

SCHEMA_VERSION = 1


@dataclass(frozen=True, eq=False)
class ChannelSequence:
    """A limit channel plus a rule producing term n for n >= 1.

    ``term(0)`` returns the limit.  Every term must act between the same
    spaces as the limit; this is checked on access.
    """

    limit: KrausChannel
    term_fn: Callable[[int], KrausChannel]

    def term(self, n: int) -> KrausChannel:
        if n < 0:
            raise ValidationError(f"sequence index must be >= 0, got {n}")
        if n == 0:
            return self.limit
        ch = self.term_fn(n)
        if (ch.d_in, ch.d_out) != (self.limit.d_in, self.limit.d_out):
            raise ValidationError(
                f"term {n} acts between dims ({ch.d_in},{ch.d_out}), limit between "
                f"({self.limit.d_in},{self.limit.d_out})"
            )
        return ch


def constant_sequence(ch: KrausChannel) -> ChannelSequence:
    return ChannelSequence(ch, lambda n: ch)


def _require_nonempty(family, what: str):
    if not family:
        raise ValidationError(f"empty {what} family")


def _strong(seq: ChannelSequence, n: int, test_states) -> tuple[float, int]:
    _require_nonempty(test_states, "test state")
    term, limit = seq.term(n), seq.limit
    best, arg = -1.0, 0
    for k, rho in enumerate(test_states):
        val = trace_norm(channel_action(term, rho.matrix) - channel_action(limit, rho.matrix))
        if val > best:
            best, arg = val, k
    return best, arg


def strong_defect(seq: ChannelSequence, n: int, test_states) -> float:
    """Largest trace-norm gap ``||term(rho) - limit(rho)||_1`` over test states."""
    return _strong(seq, n, test_states)[0]


def weak_defect(seq: ChannelSequence, n: int, test_states, test_obs) -> float:
    """Largest expectation gap ``|Tr B (term - limit)(rho)|`` over the test grid."""
    _require_nonempty(test_states, "test state")
    _require_nonempty(test_obs, "test observable")
    term, limit = seq.term(n), seq.limit
    best = 0.0
    for rho in test_states:
        delta = channel_action(term, rho.matrix) - channel_action(limit, rho.matrix)
        for b in test_obs:
            best = max(best, abs(complex(np.trace(b.matrix @ delta))))
    return best


def _strongstar(seq: ChannelSequence, n: int, test_obs, test_vectors) -> tuple[float, int, int]:
    _require_nonempty(test_obs, "test observable")
    _require_nonempty(test_vectors, "test vector")
    term, limit = seq.term(n), seq.limit
    best, arg_b, arg_v = -1.0, 0, 0
    for kb, b in enumerate(test_obs):
        delta = dual_action(term, b.matrix) - dual_action(limit, b.matrix)
        for kv, vec in enumerate(test_vectors):
            val = float(np.linalg.norm(delta @ vec))
            if val > best:
                best, arg_b, arg_v = val, kb, kv
    return best, arg_b, arg_v


def strongstar_defect(seq: ChannelSequence, n: int, test_obs, test_vectors) -> float:
    """Largest dual-side gap ``||(term* - limit*)(B) phi||_2`` over the test grid."""
    return _strongstar(seq, n, test_obs, test_vectors)[0]


def choi_defect(seq: ChannelSequence, n: int) -> float:
    """``trace_norm(J(term) - J(limit)) / d_in``, a diamond-distance lower bound."""
    return trace_norm(choi_matrix(seq.term(n)) - choi_matrix(seq.limit)) / seq.limit.d_in


@dataclass(frozen=True, eq=False)
class ConvergenceReport:
    """Defect sweep results plus the witnesses that attained each maximum.

    ``choi_dominates_strong`` records, per index, whether the Choi lower
    bound weakly dominates the strong defect seen on the test family.  It is
    a diagnostic: the true completely bounded distance always dominates, the
    lower bound need not.
    """

    indices: tuple
    strong: tuple
    strongstar: tuple
    choi: tuple
    strong_witness: tuple
    strongstar_witness: tuple
    test_family: str = ""

    def __post_init__(self):
        n = len(self.indices)
        for name in ("strong", "strongstar", "choi", "strong_witness", "strongstar_witness"):
            if len(getattr(self, name)) != n:
                raise ValidationError(f"column {name} has wrong length")
        for col in (self.strong, self.strongstar, self.choi):
            if any(x < 0 for x in col):
                raise ValidationError("defects must be nonnegative")

    @property
    def choi_dominates_strong(self) -> tuple:
        return tuple(c >= s - 1e-12 for c, s in zip(self.choi, self.strong))

    def to_json_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "kind": "convergence-report",
            "indices": list(self.indices),
            "strong": list(self.strong),
            "strongstar": list(self.strongstar),
            "choi": list(self.choi),
            "strong_witness": list(self.strong_witness),
            "strongstar_witness": list(self.strongstar_witness),
            "choi_dominates_strong": list(self.choi_dominates_strong),
            "test_family": self.test_family,
        }

    def write_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                ["n", "strong", "strongstar", "choi", "strong_witness", "strongstar_witness"]
            )
            for row in zip(
                self.indices,
                self.strong,
                self.strongstar,
                self.choi,
                self.strong_witness,
                self.strongstar_witness,
            ):
                writer.writerow([repr(x) if isinstance(x, float) else x for x in row])


def report_from_json_dict(obj: dict) -> ConvergenceReport:
    try:
        return ConvergenceReport(
            indices=tuple(int(n) for n in obj["indices"]),
            strong=tuple(float(x) for x in obj["strong"]),
            strongstar=tuple(float(x) for x in obj["strongstar"]),
            choi=tuple(float(x) for x in obj["choi"]),
            strong_witness=tuple(str(x) for x in obj["strong_witness"]),
            strongstar_witness=tuple(str(x) for x in obj["strongstar_witness"]),
            test_family=str(obj.get("test_family", "")),
        )
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed convergence report: {exc}") from exc


def convergence_report(
    seq: ChannelSequence,
    ns,
    test_states,
    test_obs,
    test_vectors,
    test_family: str = "",
) -> ConvergenceReport:
    """Sweep all three defect kinds over the given indices.

    The sweep is parallel over indices when CHANNEL_LAB_THREADS allows it;
    results are assembled in index order either way.
    """
    ns = [int(n) for n in ns]

    def evaluate(n):
        s, s_arg = _strong(seq, n, test_states)
        ss, b_arg, v_arg = _strongstar(seq, n, test_obs, test_vectors)
        c = choi_defect(seq, n)
        return s, f"state[{s_arg}]", ss, f"obs[{b_arg}]|vec[{v_arg}]", c

    rows = pmap(evaluate, ns)
    return ConvergenceReport(
        indices=tuple(ns),
        strong=tuple(r[0] for r in rows),
        strongstar=tuple(r[2] for r in rows),
        choi=tuple(r[4] for r in rows),
        strong_witness=tuple(r[1] for r in rows),
        strongstar_witness=tuple(r[3] for r in rows),
        test_family=test_family,
    )


def compression_sequence(ch: KrausChannel, sigma: DensityOperator, ranks) -> ChannelSequence:
    """Compress a channel's output onto growing coordinate subspaces.

    Term n applies the base channel, keeps the block ``P ch(rho) P`` on the
    first ``ranks[n-1]`` output coordinates, and reroutes the lost weight
    into the replacement state: ``P ch(rho) P + Tr((I-P) ch(rho)) sigma``.
    The Kraus family is {P A_i} together with operators realizing the
    replacement branch through sigma's eigenvectors.  At full rank the term
    equals the base channel.
    """
    if sigma.dim != ch.d_out:
        raise ValidationError(
            f"replacement state dim {sigma.dim} != channel output dim {ch.d_out}"
        )
    ranks = [int(r) for r in ranks]
    if not ranks:
        raise ValidationError("need at least one rank")
    for r in ranks:
        if not 0 <= r <= ch.d_out:
            raise ValidationError(f"rank {r} outside 0..{ch.d_out}")
    if any(a > b for a, b in zip(ranks, ranks[1:])):
        raise ValidationError(f"ranks must be nondecreasing, got {ranks}")

    vals, vecs = ordered_eigh(sigma.matrix)
    kept = [(vals[k], vecs[:, k]) for k in range(len(vals)) if vals[k] > 1e-12]

    @lru_cache(maxsize=None)
    def term(n: int) -> KrausChannel:
        if n > len(ranks):
            raise ValidationError(f"term {n} beyond the configured {len(ranks)} ranks")
        r = ranks[n - 1]
        proj = np.zeros((ch.d_out, ch.d_out), dtype=np.complex128)
        proj[:r, :r] = np.eye(r)
        lost = np.eye(ch.d_out) - proj
        ops = [proj @ a for a in ch.kraus_ops]
        for p, v in kept:
            root = np.sqrt(p)
            for a in ch.kraus_ops:
                rows = lost @ a
                for m in range(ch.d_out):
                    if np.linalg.norm(rows[m, :]) < 1e-14:
                        continue
                    ops.append(root * np.outer(v, rows[m, :]))
        return KrausChannel(tuple(ops))

    return ChannelSequence(ch, term)


def swap_counterexample(d: int) -> tuple[list[PartialIsometry], np.ndarray]:
    """Partial isometries that converge strongly but not in the strong* sense.

    On dim d, the first d-1 basis vectors are the tracked frame and the last
    one is the witness psi.  Term n fixes every frame vector except the n-th,
    which it swaps out to psi.  Each fixed frame vector is eventually exact
    (term n acts as the limit projector on it once n differs from its index),
    while the adjoints send psi to a fresh frame vector forever:
    ``W_n* psi`` is the n-th frame vector, at distance 1 from the limit's 0.
    Returns the list of terms (n = 1..d-1) and psi; the limit is the
    projector onto the frame, i.e. ``terms[0].initial_projector``.
    """
    if d < 3:
        raise ValidationError(f"the swap family needs dimension >= 3, got {d}")
    psi = np.zeros(d, dtype=np.complex128)
    psi[d - 1] = 1.0
    terms = []
    for n in range(1, d):
        w = np.zeros((d, d), dtype=np.complex128)
        for i in range(1, d):
            row = d - 1 if i == n else i - 1
            w[row, i - 1] = 1.0
        terms.append(PartialIsometry(w))
    return terms, psi


@dataclass(frozen=True, eq=False)
class PartialTraceForm:
    """A sequence presented as ``rho -> Tr_env W(n) V0 rho V0* W(n)*``.

    ``v0`` fixes the embedding and the output/environment split; each
    ``w_fn(n)`` must be a partial isometry whose initial projector is the
    range projector of ``v0`` (checked on access, within TOL_VALID), so that
    every composite ``W(n) V0`` is again an isometry.
    """

    v0: StinespringIsometry
    w_fn: Callable[[int], PartialIsometry]

    def isometry(self, n: int) -> StinespringIsometry:
        if n < 0:
            raise ValidationError(f"sequence index must be >= 0, got {n}")
        if n == 0:
            return self.v0
        w = self.w_fn(n)
        range0 = self.v0.v @ dagger(self.v0.v)
        drift = opnorm(w.initial_projector - range0)
        if drift > 1e-10:
            raise ValidationError(
                f"term {n}: initial projector deviates from the embedding range "
                f"by {drift:.3e}"
            )
        return StinespringIsometry(w.w @ self.v0.v, self.v0.d_out, self.v0.d_env)


def channels_from_partial_isometries(form: PartialTraceForm, ns=()) -> ChannelSequence:
    """The channel sequence of a partial-trace form.

    ``ns`` lists indices to validate eagerly (the compatibility of W(n) with
    the embedding); all terms are validated again lazily on access.
    """
    for n in ns:
        form.isometry(int(n))
    return ChannelSequence(
        kraus_from_isometry(form.v0),
        lambda n: kraus_from_isometry(form.isometry(n)),
    )


def givens_rotation(dim: int, i: int, j: int, theta: float) -> np.ndarray:
    """The rotation by ``theta`` in the (e_i, e_j) coordinate plane."""
    if i == j or not (0 <= i < dim and 0 <= j < dim):
        raise ValidationError(f"invalid rotation plane ({i}, {j}) in dim {dim}")
    r = np.eye(dim, dtype=np.complex128)
    c, s = np.cos(theta), np.sin(theta)
    r[i, i] = c
    r[j, j] = c
    r[i, j] = -s
    r[j, i] = s
    return r


def rotation_partial_trace_form(
    v0: StinespringIsometry,
    plane: tuple[int, int],
    theta_fn: Callable[[int], float],
) -> PartialTraceForm:
    """Partial-trace form with ``W(n)`` a plane rotation of the embedding range.

    ``W(n) = R(theta_fn(n)) P0`` where P0 projects onto the range of v0, so
    the terms converge to the limit in operator norm as the angles shrink.
    """
    p0 = v0.v @ dagger(v0.v)
    dim = p0.shape[0]

    def w(n: int) -> PartialIsometry:
        return PartialIsometry(givens_rotation(dim, plane[0], plane[1], theta_fn(n)) @ p0)

    return PartialTraceForm(v0, w)


def tensor_sequence(a: ChannelSequence, b: ChannelSequence) -> ChannelSequence:
    """Elementwise tensor product of two sequences."""
    return ChannelSequence(
        tensor_channels(a.limit, b.limit),
        lambda n: tensor_channels(a.term(n), b.term(n)),
    )


def compose_sequence(first: ChannelSequence, then: ChannelSequence) -> ChannelSequence:
    """Elementwise composition: term n applies ``first.term(n)``, then ``then.term(n)``."""
    if first.limit.d_out != then.limit.d_in:
        raise ValidationError(
            f"cannot compose sequences: first outputs dim {first.limit.d_out}, "
            f"second expects dim {then.limit.d_in}"
        )
    return ChannelSequence(
        compose_channels(first.limit, then.limit),
        lambda n: compose_channels(first.term(n), then.term(n)),
    )


def complementary_sequence(source) -> ChannelSequence:
    """The sequence of complementary channels.

    For a :class:`PartialTraceForm` the complementary channel comes directly
    from the isometry ``W(n) V0``, sharing the form's environment.  For a
    plain :class:`ChannelSequence` each term's minimal dilation is padded to
    the common environment dim ``d_in * d_out`` (an upper bound on every
    Choi rank) so all complementary channels share one output space.
    """
    if isinstance(source, PartialTraceForm):
        return ChannelSequence(
            complementary_kraus(source.v0),
            lambda n: complementary_kraus(source.isometry(n)),
        )
    d_env = source.limit.d_in * source.limit.d_out

    def comp(ch: KrausChannel) -> KrausChannel:
        v = minimal_stinespring(ch)
        if v.d_env > d_env:
            raise ValidationError(
                f"minimal environment dim {v.d_env} exceeds the common dim {d_env}"
            )
        return complementary_kraus(pad_environment(v, d_env))

    return ChannelSequence(comp(source.limit), lambda n: comp(source.term(n)))
