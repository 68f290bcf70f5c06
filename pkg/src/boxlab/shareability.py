"""Shareability, cloning, and monogamy of bipartite boxes.

A box is m-shareable with respect to one party when a symmetric
(m+1)-party nonsignaling extension exists whose every copy-marginal is
the box itself.  That existence question is one exact LP.  Shareable
boxes admit local models on the restricted inputs (the copies' outputs
serve as the hidden variable); local boxes extend to any number of
copies.  Perfect cloning of one wing is the same question, which is why
nonlocal boxes cannot be cloned, and the isotropic family's cloning
ceiling sits at C = 1/2.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

from . import lp, polytope
from .bell import BellFunctional, chsh_functional, unique_ns_maximizer
from .core import (
    Box,
    BoxlabError,
    Scenario,
    ScenarioMismatch,
    ZERO,
    ONE,
    box_from_function,
    is_nonsignaling,
    marginal,
    mix,
    permute_parties,
    rat,
    relabel,
    uniform_box,
    validate_box,
)
from .isotropic import make_isotropic
from .locality import LocalModel
from .polytope import DeterministicStrategy

EXTENSION_SIZE_CAP = 100_000


class BadParams(BoxlabError):
    pass


class ExtensionTooLarge(BoxlabError):
    pass


class NotAnExtension(BoxlabError):
    pass


class NotUniqueMaximizer(BoxlabError):
    pass


@dataclass(frozen=True)
class ExtensionProblem:
    """Ask for `copies` symmetric clones of one wing of a bipartite box."""

    base: Box
    shared_party: str  # "A" | "B"
    copies: int

    def __post_init__(self):
        if self.base.scenario.parties != 2:
            raise ScenarioMismatch("extension problems start from bipartite boxes")
        if self.shared_party not in ("A", "B"):
            raise BadParams("shared_party must be 'A' or 'B'")
        if self.copies < 1:
            raise BadParams("need at least one copy")
        if not is_nonsignaling(self.base):
            raise ScenarioMismatch("base box must be nonsignaling")

    def extension_scenario(self) -> Scenario:
        X, Y = self.base.scenario.inputs
        A, B = self.base.scenario.outputs
        m = self.copies
        if self.shared_party == "B":
            return Scenario((X,) + (Y,) * m, (A,) + (B,) * m)
        return Scenario((X,) * m + (Y,), (A,) * m + (B,))

    def copy_slots(self) -> tuple[int, ...]:
        m = self.copies
        return tuple(range(1, m + 1)) if self.shared_party == "B" else tuple(range(m))

    def fixed_slot(self) -> int:
        return 0 if self.shared_party == "B" else self.copies


@dataclass(frozen=True)
class ExtensionWitness:
    feasible: bool
    extension: Box | None = None
    certificate: lp.LpCertificate | None = None
    folded: bool = False  # which formulation the certificate belongs to


# above this many extension entries the LP folds the copy symmetry into
# orbit variables instead of carrying explicit equality rows
FOLD_THRESHOLD = 64


def _swap_slots(t: tuple, i: int, j: int) -> tuple:
    out = list(t)
    out[i], out[j] = out[j], out[i]
    return tuple(out)


def _marginal_templates(problem: ExtensionProblem):
    """Rows expressing each copy-marginal entry as a sum of extension
    entries, other copies pinned to input 0.  Yields (row, (a, b, x, y))."""
    ext = problem.extension_scenario()
    fixed = problem.fixed_slot()
    slots = problem.copy_slots()
    X, Y = problem.base.scenario.inputs
    A, B = problem.base.scenario.outputs
    for slot in slots:
        others = [s for s in slots if s != slot]
        for x in range(X):
            for y in range(Y):
                xs = [0] * ext.parties
                xs[fixed] = x
                xs[slot] = y
                for a in range(A):
                    for b in range(B):
                        row = [ZERO] * ext.table_size
                        for rest in itertools.product(
                            *(range(ext.outputs[s]) for s in others)
                        ):
                            outs = [0] * ext.parties
                            outs[fixed] = a
                            outs[slot] = b
                            for s, v in zip(others, rest):
                                outs[s] = v
                            row[ext.flat_index(outs, xs)] += ONE
                        yield row, (a, b, x, y)


def _symmetry_rows(problem: ExtensionProblem):
    """Equality of the table under adjacent transpositions of copy slots
    (inputs and outputs together); these generate the full symmetric group."""
    ext = problem.extension_scenario()
    slots = problem.copy_slots()
    rows = []
    for i, j in zip(slots, slots[1:]):
        for xi, xs in enumerate(ext.input_tuples()):
            for outs in ext.output_tuples():
                flat = ext.flat_index(outs, xs)
                swapped = ext.flat_index(_swap_slots(outs, i, j), _swap_slots(xs, i, j))
                if flat < swapped:
                    row = [ZERO] * ext.table_size
                    row[flat] = ONE
                    row[swapped] = -ONE
                    rows.append(row)
    return rows


def extension_lp(problem: ExtensionProblem) -> lp.LinearProgram:
    """Feasibility LP: nonnegativity, normalization, copy symmetry, exact
    copy-marginals, and the nonsignaling trace conditions on the extension."""
    ext = problem.extension_scenario()
    if ext.table_size > EXTENSION_SIZE_CAP:
        raise ExtensionTooLarge(
            f"extension table has {ext.table_size} entries, cap {EXTENSION_SIZE_CAP}"
        )
    prog = lp.LinearProgram(ext.table_size)
    for coeffs, rhs in polytope.normalization_rows(ext):
        prog.add_eq(coeffs, rhs)
    for row in _symmetry_rows(problem):
        prog.add_eq(row, ZERO)
    for row, (a, b, x, y) in _marginal_templates(problem):
        prog.add_eq(row, problem.base.prob((a, b), (x, y)))
    for coeffs, rhs in polytope.ns_equality_rows(ext):
        prog.add_eq(coeffs, rhs)
    return prog


def _orbits(problem: ExtensionProblem):
    """Group table indices by the copy-permutation symmetry: entries whose
    (output, input) pairs on the copy slots agree as multisets share one
    orbit.  Returns (orbit index per flat table index, orbit count)."""
    ext = problem.extension_scenario()
    slots = problem.copy_slots()
    fixed = problem.fixed_slot()
    orbit_of = []
    orbit_index: dict = {}
    for xs in ext.input_tuples():
        for outs in ext.output_tuples():
            key = (
                outs[fixed],
                xs[fixed],
                tuple(sorted((outs[s], xs[s]) for s in slots)),
            )
            if key not in orbit_index:
                orbit_index[key] = len(orbit_index)
            orbit_of.append(orbit_index[key])
    return orbit_of, len(orbit_index)


def folded_extension_lp(problem: ExtensionProblem):
    """Same feasible set as extension_lp but with one variable per symmetry
    orbit, making the symmetry rows unnecessary; duplicate folded rows are
    dropped.  Returns (program, orbit index per flat table index)."""
    ext = problem.extension_scenario()
    if ext.table_size > EXTENSION_SIZE_CAP:
        raise ExtensionTooLarge(
            f"extension table has {ext.table_size} entries, cap {EXTENSION_SIZE_CAP}"
        )
    orbit_of, n_orbits = _orbits(problem)
    prog = lp.LinearProgram(n_orbits)
    seen = set()

    def add_folded(coeffs, rhs):
        folded = [ZERO] * n_orbits
        for i, c in enumerate(coeffs):
            if c:
                folded[orbit_of[i]] += c
        key = (tuple(folded), rhs)
        if key not in seen:
            seen.add(key)
            prog.add_eq(folded, rhs)

    for coeffs, rhs in polytope.normalization_rows(ext):
        add_folded(coeffs, rhs)
    for row, (a, b, x, y) in _marginal_templates(problem):
        add_folded(row, problem.base.prob((a, b), (x, y)))
    for coeffs, rhs in polytope.ns_equality_rows(ext):
        add_folded(coeffs, rhs)
    return prog, orbit_of


def validate_extension(problem: ExtensionProblem, extension: Box) -> None:
    """Raise NotAnExtension unless symmetric, nonsignaling, and marginal-exact."""
    ext = problem.extension_scenario()
    if extension.scenario != ext:
        raise NotAnExtension("extension scenario mismatch")
    slots = problem.copy_slots()
    for i, j in zip(slots, slots[1:]):
        for xs in ext.input_tuples():
            for outs in ext.output_tuples():
                if extension.prob(outs, xs) != extension.prob(
                    _swap_slots(outs, i, j), _swap_slots(xs, i, j)
                ):
                    raise NotAnExtension(f"not symmetric under swapping slots {i},{j}")
    if not is_nonsignaling(extension):
        raise NotAnExtension("extension is signaling")
    fixed = problem.fixed_slot()
    for slot in slots:
        pair = (fixed, slot) if fixed < slot else (slot, fixed)
        if marginal(extension, pair) != problem.base:
            raise NotAnExtension(f"marginal onto slot {slot} differs from the base")


def use_folded_formulation(problem: ExtensionProblem) -> bool:
    return problem.extension_scenario().table_size > FOLD_THRESHOLD


def is_m_shareable(problem: ExtensionProblem, fold: bool | None = None) -> ExtensionWitness:
    """Decide shareability; a feasible witness is validated before return.

    Larger instances fold the symmetry into orbit variables (same feasible
    set, one representative per entry class); small ones keep the explicit
    equality rows.  Pass fold= to force either formulation.
    """
    if fold is None:
        fold = use_folded_formulation(problem)
    if fold:
        prog, orbit_of = folded_extension_lp(problem)
        out = lp.solve(prog)
        if out.status == lp.OPTIMAL:
            table = [out.primal[o] for o in orbit_of]
            ext = validate_box(table, problem.extension_scenario())
            validate_extension(problem, ext)
            return ExtensionWitness(True, extension=ext, folded=True)
        assert out.status == lp.INFEASIBLE
        return ExtensionWitness(False, certificate=out.certificate, folded=True)
    out = lp.solve(extension_lp(problem))
    if out.status == lp.OPTIMAL:
        ext = validate_box(out.primal, problem.extension_scenario())
        validate_extension(problem, ext)
        return ExtensionWitness(True, extension=ext)
    assert out.status == lp.INFEASIBLE
    return ExtensionWitness(False, certificate=out.certificate)


def clone_feasibility(box: Box, m: int) -> ExtensionWitness:
    """Perfect cloning of Bob's wing into m copies is exactly m-shareability:
    infeasibility certifies that no perfect cloning machine can act here."""
    return is_m_shareable(ExtensionProblem(box, "B", m))


def restrict_bob_inputs(box: Box, y_values) -> Box:
    """Bipartite box keeping only the listed Bob inputs, re-indexed."""
    X, _ = box.scenario.inputs
    A, B = box.scenario.outputs
    ys = tuple(y_values)
    sub = Scenario((X, len(ys)), (A, B))
    table = []
    for x in range(X):
        for j in range(len(ys)):
            for a in range(A):
                for b in range(B):
                    table.append(box.prob((a, b), (x, ys[j])))
    return Box(sub, tuple(table))


def local_model_from_extension(
    problem: ExtensionProblem, extension: Box, y_values=None
) -> LocalModel:
    """Turn an m-extension into a local model for the base box restricted
    to m input values on the shared side.

    The hidden variable is the copies' output string when copy i is fed
    y_values[i]; the shared party answers deterministically from it, the
    other party answers with the conditional read off the extension,
    refined into deterministic strategies.  Reconstruction of the
    restricted box (inputs sorted(set(y_values))) is exact and asserted.
    """
    validate_extension(problem, extension)
    if problem.shared_party == "A":
        swapped = ExtensionProblem(
            permute_parties(problem.base, (1, 0)), "B", problem.copies
        )
        order = (problem.copies,) + tuple(range(problem.copies))
        model = local_model_from_extension(
            swapped, permute_parties(extension, order), y_values
        )
        sc_sw = Scenario(
            (model.scenario.inputs[1], model.scenario.inputs[0]),
            (model.scenario.outputs[1], model.scenario.outputs[0]),
        )
        return LocalModel(
            sc_sw,
            tuple(
                DeterministicStrategy(sc_sw, (s.tables[1], s.tables[0]))
                for s in model.strategies
            ),
            model.weights,
        )

    m = problem.copies
    X, Y = problem.base.scenario.inputs
    A, B = problem.base.scenario.outputs
    if y_values is None:
        y_values = tuple(i % Y for i in range(m))
    y_values = tuple(y_values)
    if len(y_values) != m or any(not 0 <= y < Y for y in y_values):
        raise BadParams(f"need {m} valid Bob inputs, got {y_values}")
    kept = sorted(set(y_values))
    # first copy assigned to each kept input value
    slot_for = {y: y_values.index(y) for y in kept}
    restricted = restrict_bob_inputs(problem.base, kept)

    strategies = []
    weights = []
    alice_functions = list(itertools.product(range(A), repeat=X))
    for bs in itertools.product(range(B), repeat=m):
        xs = (0,) + y_values
        w = sum((extension.prob((a,) + bs, xs) for a in range(A)), ZERO)
        if not w:
            continue
        # Alice's conditional response for each of her inputs
        cond = []
        for x in range(X):
            xs_x = (x,) + y_values
            cond.append([extension.prob((a,) + bs, xs_x) / w for a in range(A)])
        bob_table = tuple(bs[slot_for[y]] for y in kept)
        for f in alice_functions:
            wf = w
            for x in range(X):
                wf *= cond[x][f[x]]
                if not wf:
                    break
            if wf:
                strategies.append(
                    DeterministicStrategy(restricted.scenario, (f, bob_table))
                )
                weights.append(wf)
    model = LocalModel(restricted.scenario, tuple(strategies), tuple(weights))
    assert model.reconstructs(restricted)
    return model


def infinite_shareability_extension(model: LocalModel, m: int) -> Box:
    """Extend a local bipartite box to m copies of Bob by replaying the
    model's Bob response in every copy; valid for every m."""
    if model.scenario.parties != 2:
        raise ScenarioMismatch("need a bipartite local model")
    if m < 1:
        raise BadParams("need at least one copy")
    X, Y = model.scenario.inputs
    ext = Scenario((X,) + (Y,) * m, (model.scenario.outputs[0],) + (model.scenario.outputs[1],) * m)
    table = [ZERO] * ext.table_size
    n_out = ext.num_output_tuples
    for strat, w in zip(model.strategies, model.weights):
        if not w:
            continue
        fa, fb = strat.tables
        for xi, xs in enumerate(ext.input_tuples()):
            outs = (fa[xs[0]],) + tuple(fb[y] for y in xs[1:])
            table[xi * n_out + ext.output_index(outs)] += w
    return Box(ext, tuple(table))


# ---------------------------------------------------------------------------
# cloning ceiling for the isotropic family


def _simplest_between(lo: Fraction, hi: Fraction) -> Fraction:
    """Smallest-denominator rational in [lo, hi] via Stern-Brocot descent."""
    if lo > hi:
        raise ValueError("empty interval")
    fl = math.ceil(lo)
    if fl <= hi:
        return Fraction(fl)
    n = math.floor(lo)
    return n + 1 / _simplest_between(1 / (hi - n), 1 / (lo - n))


def _iso_ceiling_lp(c_floor: Fraction) -> lp.LinearProgram:
    """max C over 2-extensions of isotropic-C, C in [c_floor, 1]; the
    isotropic family is affine in C so C rides along as one LP variable."""
    pr = make_isotropic(1)
    noise = make_isotropic(0)
    problem = ExtensionProblem(noise, "B", 2)
    ext = problem.extension_scenario()
    nv = ext.table_size + 1
    c_var = ext.table_size
    prog = lp.LinearProgram(nv)
    obj = [ZERO] * nv
    obj[c_var] = ONE
    prog.set_objective(obj)
    prog.set_bounds(c_var, c_floor, ONE)
    for coeffs, rhs in polytope.normalization_rows(ext):
        prog.add_eq(list(coeffs) + [ZERO], rhs)
    for row in _symmetry_rows(problem):
        prog.add_eq(list(row) + [ZERO], ZERO)
    for row, (a, b, x, y) in _marginal_templates(problem):
        pr_e = pr.prob((a, b), (x, y))
        noise_e = noise.prob((a, b), (x, y))
        prog.add_eq(list(row) + [noise_e - pr_e], noise_e)
    for coeffs, rhs in polytope.ns_equality_rows(ext):
        prog.add_eq(list(coeffs) + [ZERO], rhs)
    return prog


def isotropic_clone_ceiling(bisection_steps: int = 10) -> Fraction:
    """Largest C for which isotropic-C is 2-shareable toward Bob.

    Rational bisection brackets the threshold, the simplest rational in
    the bracket is the candidate, and one parametric LP (maximize C over
    valid extensions with C at least the candidate) confirms it exactly.
    """

    def feasible(c: Fraction) -> bool:
        return is_m_shareable(ExtensionProblem(make_isotropic(c), "B", 2)).feasible

    if feasible(ONE):
        return ONE
    lo, hi = ZERO, ONE  # feasible, infeasible
    for _ in range(bisection_steps):
        mid = (lo + hi) / 2
        if feasible(mid):
            lo = mid
        else:
            hi = mid
    candidate = _simplest_between(lo, hi)
    if not feasible(candidate):
        candidate = lo
    out = lp.solve(_iso_ceiling_lp(candidate))
    assert out.status == lp.OPTIMAL and out.value == candidate
    return candidate


def cloning_shrink_factor(c) -> Fraction:
    """Ratio between the clones' best isotropic parameter and the original:
    1/(2C), the ceiling divided by the starting parameter."""
    c = rat(c)
    if not 0 < c <= 1:
        raise BadParams("shrink factor needs C in (0, 1]")
    ceiling = Fraction(1, 2)
    return min(ONE, ceiling / c)


# ---------------------------------------------------------------------------
# monogamy


def _pair_rows(sc3: Scenario, parties: tuple[int, int], functional: BellFunctional):
    """Lift a bipartite functional's coefficients to the tripartite table:
    marginal entries expand into sums with the absent parties' inputs at 0."""
    coeffs = [ZERO] * sc3.table_size
    i, j = parties
    others = [k for k in range(sc3.parties) if k not in parties]
    sub = functional.scenario
    for xs_sub in sub.input_tuples():
        xs = [0] * sc3.parties
        xs[i], xs[j] = xs_sub
        for outs_sub in sub.output_tuples():
            c = functional.coefficients[sub.flat_index(outs_sub, xs_sub)]
            if not c:
                continue
            for rest in itertools.product(*(range(sc3.outputs[k]) for k in others)):
                outs = [0] * sc3.parties
                outs[i], outs[j] = outs_sub
                for k, v in zip(others, rest):
                    outs[k] = v
                coeffs[sc3.flat_index(outs, xs)] += c
    return coeffs


def monogamy_lp(beta) -> lp.LinearProgram:
    """Maximize the linear part of CHSH(A,C) over tripartite binary
    nonsignaling boxes with CHSH(A,B) >= beta; add the -1 offset back to
    the optimal value to read off the CHSH tradeoff."""
    beta = rat(beta)
    if not -1 <= beta <= 1:
        raise BadParams(f"beta must be in [-1, 1], got {beta}")
    sc3 = Scenario((2, 2, 2), (2, 2, 2))
    f = chsh_functional()
    ab = _pair_rows(sc3, (0, 1), f)
    ac = _pair_rows(sc3, (0, 2), f)
    prog = polytope.ns_lp(sc3, ac)
    # chsh_AB >= beta, offset -1 folded into the right-hand side
    prog.add_ineq([-v for v in ab], -(beta - f.offset))
    return prog


def monogamy_tradeoff(beta) -> Fraction:
    """Largest CHSH(A,C) over tripartite binary nonsignaling boxes whose
    CHSH(A,B) is at least beta; at most 0 whenever beta is positive."""
    out = lp.solve(monogamy_lp(beta))
    assert out.status == lp.OPTIMAL
    return out.value - 1


def unique_violator_decoupling(
    f: BellFunctional, g: BellFunctional
) -> tuple[Fraction, Fraction]:
    """(max, min) of g on the Alice-Clare marginal when Alice-Bob sit at
    f's unique nonsignaling maximum; equality means Clare decoupled."""
    unique, _ = unique_ns_maximizer(f)
    if not unique:
        raise NotUniqueMaximizer("functional has no unique NS maximizer")
    fa, fb = f.scenario.inputs
    ga, gc = g.scenario.inputs
    if (fa, f.scenario.outputs[0]) != (ga, g.scenario.outputs[0]):
        raise ScenarioMismatch("f and g disagree on Alice's alphabets")
    sc3 = Scenario(
        (fa, f.scenario.inputs[1], gc),
        (f.scenario.outputs[0], f.scenario.outputs[1], g.scenario.outputs[1]),
    )
    ab = _pair_rows(sc3, (0, 1), f)
    ac = _pair_rows(sc3, (0, 2), g)
    hi = polytope.max_over_ns(sc3, ac, extra_eqs=[(ab, ONE - f.offset)])
    lo = polytope.max_over_ns(
        sc3, [-v for v in ac], extra_eqs=[(ab, ONE - f.offset)]
    )
    assert hi.status == lp.OPTIMAL and lo.status == lp.OPTIMAL
    return hi.value + g.offset, -lo.value + g.offset


# ---------------------------------------------------------------------------
# polygamy example and generalized isotropic boxes


def polygamy_example() -> Box:
    """Symmetric tripartite box whose AB and AC marginals are both nonlocal:
    with probability 1/2, A-B share a PR box on outputs {0,1} while C sees
    noise there; with probability 1/2, A-C share one on {2,3} while B sees
    noise on {2,3}."""
    sc3 = Scenario((2, 2, 2), (4, 4, 4))
    half = Fraction(1, 2)

    def pr_pair(u, v, x, y, lowpair) -> Fraction:
        base = 0 if lowpair else 2
        if u not in (base, base + 1) or v not in (base, base + 1):
            return ZERO
        return half if ((u - base) + (v - base)) % 2 == x * y else ZERO

    def term1(outs, xs):
        a, b, c = outs
        if c not in (0, 1):
            return ZERO
        return pr_pair(a, b, xs[0], xs[1], True) * half

    def term2(outs, xs):
        a, b, c = outs
        if b not in (2, 3):
            return ZERO
        return pr_pair(a, c, xs[0], xs[2], False) * half

    table = []
    for xs in sc3.input_tuples():
        for outs in sc3.output_tuples():
            table.append(half * term1(outs, xs) + half * term2(outs, xs))
    return validate_box(table, sc3)


def generalized_pr(num_outputs: int) -> Box:
    """Two inputs per party, outputs mod-A correlated: a - b = xy (mod A)."""
    if num_outputs < 2:
        raise BadParams("need at least two outputs")
    A = num_outputs
    sc = Scenario((2, 2), (A, A))
    return box_from_function(
        sc,
        lambda outs, xs: Fraction(1, A)
        if (outs[0] - outs[1]) % A == (xs[0] * xs[1]) % A
        else 0,
    )


def _single_party_product(sc: Scenario, dist_a, dist_b) -> Box:
    table = []
    for _ in sc.input_tuples():
        for outs in sc.output_tuples():
            table.append(dist_a[outs[0]] * dist_b[outs[1]])
    return validate_box(table, sc)


def generalized_isotropic(num_outputs: int, c, dist_a=None, dist_b=None) -> Box:
    """C times the generalized PR box plus (1-C) times a product of
    input-independent single-party distributions (uniform by default)."""
    A = num_outputs
    c = rat(c)
    if not 0 <= c <= 1:
        raise BadParams(f"weight must be in [0, 1], got {c}")
    uniform = [Fraction(1, A)] * A
    da = [rat(v) for v in dist_a] if dist_a is not None else uniform
    db = [rat(v) for v in dist_b] if dist_b is not None else da
    for d in (da, db):
        if len(d) != A or any(v < 0 for v in d) or sum(d, ZERO) != 1:
            raise BadParams(f"invalid single-party distribution {d}")
    gpr = generalized_pr(A)
    return mix([gpr, _single_party_product(gpr.scenario, da, db)], [c, 1 - c])


def shared_shift_symmetrize(box: Box) -> Box:
    """Average over a shared uniform shift r: both outputs move by r mod A.

    Fixes the generalized PR box, makes single-party marginals uniform,
    and maps any output-product noise to shift-invariant noise (uniform
    over each diagonal a - b = const, not a product in general).
    """
    sc = box.scenario
    if sc.parties != 2 or sc.outputs[0] != sc.outputs[1]:
        raise ScenarioMismatch("need a bipartite box with equal output alphabets")
    A = sc.outputs[0]
    in_perms = [tuple(range(v)) for v in sc.inputs]
    variants = []
    for r in range(A):
        tau = tuple((v + r) % A for v in range(A))
        out_perms = [[tau] * sc.inputs[0], [tau] * sc.inputs[1]]
        variants.append(relabel(box, in_perms, out_perms))
    return mix(variants, [Fraction(1, A)] * A)
