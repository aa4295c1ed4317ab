"""Derivation-building type checker.

Judgements hold contexts that bind each variable to a type and the basis
its binder was annotated with.  The checker follows the typing rules
where they apply: variables, sums of equally annotated abstractions,
applications, pairs, the two let rules, the two case rules, sums of
orthogonal realizers, and phase.  Distributions are kept canonical, so
before dispatching the checker refactors a flattened sum back into a
single application, pair, let, or case whenever the congruence allows
it.  Closed subterms can always fall back to direct evaluation against
the goal, and a let or case over an enumerable context can fall back to
a semantic check that verifies linearity of the images generator by
generator.  Both fallbacks are recorded in the derivation, never hidden.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .core import (
    App,
    Basis,
    Case,
    Lam,
    LetPair,
    Ortho,
    Pair,
    PureTerm,
    TermDist,
    Var,
    add,
    basis_eq,
    dist_eq,
    free_vars,
    inner_product,
    is_closed,
    mk_app,
    mk_pair,
    sc_eq,
    sc_is_zero,
    scale,
    single,
    term_eq,
)
from .basis import NAMED_BASES, qubit_arity
from .reduction import NormalForm, evaluate
from .subst import apply_sigma, fresh_name, subst_dist
from .typesem import (
    Arrow,
    BasisType,
    Prod,
    Sharp,
    Type,
    Undecidable,
    finite_members,
    format_type,
    is_member,
    is_member_phase,
    realizes,
    sharp_normalize,
    span_generators,
    subtype,
    type_eq,
)


@dataclass(frozen=True, eq=False)
class Binding:
    type: Type
    basis: Basis


Context = dict[str, Binding]


class CheckError(Exception):
    def __init__(self, message: str, note: str = ""):
        super().__init__(message if not note else f"{message} ({note})")
        self.message = message
        self.note = note


@dataclass
class Derivation:
    rule: str
    ctx: tuple[tuple[str, Binding], ...]
    term: TermDist
    goal: Type
    premises: tuple["Derivation", ...] = ()
    note: str = ""

    def walk(self):
        yield self
        for p in self.premises:
            yield from p.walk()


def derivation_bindings(d: Derivation) -> list[tuple[str, Binding]]:
    out = []
    for node in d.walk():
        out.extend(node.ctx)
    return out


def uses_sharp_binding(d: Derivation) -> bool:
    """True when any context anywhere in the derivation binds a variable
    at a sharp type."""
    return any(
        isinstance(sharp_normalize(b.type), Sharp)
        for _, b in derivation_bindings(d)
    )


def sdom(ctx: Context) -> frozenset[str]:
    """Variables whose type already denotes a span: exactly the sharp
    headed types after normalization."""
    return frozenset(
        x
        for x, b in ctx.items()
        if isinstance(sharp_normalize(b.type), Sharp)
    )


def _snapshot(ctx: Context) -> tuple[tuple[str, Binding], ...]:
    return tuple(sorted(ctx.items()))


def _node(
    rule: str,
    ctx: Context,
    term: TermDist,
    goal: Type,
    premises: tuple[Derivation, ...] = (),
    note: str = "",
) -> Derivation:
    return Derivation(rule, _snapshot(ctx), term, goal, premises, note)


# ---------------------------------------------------------------------------
# Context bookkeeping: weakening of unused basis-typed variables, and
# splitting with contraction restricted to basis-typed variables.


def _usable(ctx: Context, d: TermDist) -> Context:
    fv = free_vars(d)
    for x in fv:
        if x not in ctx:
            raise CheckError(f"unbound variable: {x}")
    used: Context = {}
    for x, b in ctx.items():
        if x in fv:
            used[x] = b
        elif not isinstance(sharp_normalize(b.type), BasisType):
            raise CheckError(f"linear variable dropped: {x}")
    return used


def _split(ctx: Context, parts: list[frozenset[str]]) -> list[Context]:
    out: list[Context] = [{} for _ in parts]
    for x, b in ctx.items():
        hits = [i for i, fv in enumerate(parts) if x in fv]
        if len(hits) > 1 and not isinstance(
            sharp_normalize(b.type), BasisType
        ):
            raise CheckError(f"linear variable duplicated: {x}")
        for i in hits:
            out[i][x] = b
    return out


def _rebind(ctx: Context, var: str, body: TermDist) -> tuple[str, TermDist]:
    """Rename a binder that would shadow a context variable."""
    if var not in ctx:
        return var, body
    fresh = fresh_name(var, frozenset(ctx) | free_vars(body))
    return fresh, subst_dist(body, var, single(Var(fresh)))


# ---------------------------------------------------------------------------
# Refactoring canonical sums back into single constructors.  The
# congruence flattens applications, pairs, and scrutinees; these helpers
# undo that where the coefficients allow it, which is an equivalence
# step, not a new rule.


def _classes(terms: list[PureTerm]) -> list[PureTerm]:
    reps: list[PureTerm] = []
    for t in terms:
        if not any(term_eq(t, r) for r in reps):
            reps.append(t)
    return reps


def _class_of(reps: list[PureTerm], t: PureTerm) -> int:
    for i, r in enumerate(reps):
        if term_eq(t, r):
            return i
    raise AssertionError("unclassified term")


def _factor_bilinear(
    d: TermDist, left_of, right_of
) -> Optional[tuple[TermDist, TermDist]]:
    """Write d as (sum of lefts) x (sum of rights) when its coefficient
    matrix has rank one."""
    lefts = _classes([left_of(t) for t, _ in d.entries])
    rights = _classes([right_of(t) for t, _ in d.entries])
    m = np.zeros((len(lefts), len(rights)), dtype=complex)
    for t, c in d.entries:
        m[_class_of(lefts, left_of(t)), _class_of(rights, right_of(t))] += c
    u, s, vh = np.linalg.svd(m)
    if len(s) > 1 and not sc_is_zero(s[1]):
        return None
    rebuilt = add(
        *(scale(u[i, 0], single(t)) for i, t in enumerate(lefts))
    ), add(
        *(scale(s[0] * vh[0, j], single(t)) for j, t in enumerate(rights))
    )
    if not dist_eq(
        _rebuild_bilinear(d, rebuilt[0], rebuilt[1], left_of, right_of), d
    ):
        return None
    return rebuilt


def _rebuild_bilinear(d, left, right, left_of, right_of) -> TermDist:
    sample = d.entries[0][0]
    if isinstance(sample, App):
        return mk_app(left, right)
    return mk_pair(left, right)


def _factor_scrutinee(
    d: TermDist,
) -> Optional[tuple[PureTerm, TermDist]]:
    """A sum of lets (or cases) that differ only in the scrutinee is one
    let (or case) of the summed scrutinees."""
    sample = d.entries[0][0]
    scrs = []
    for t, c in d.entries:
        if isinstance(sample, LetPair):
            if not isinstance(t, LetPair):
                return None
            probe = LetPair(
                t.var1, t.basis1, t.var2, t.basis2, sample.scrutinee, t.body
            )
            if not term_eq(probe, sample):
                return None
            scrs.append((t.scrutinee, c))
        elif isinstance(sample, Case):
            if not isinstance(t, Case):
                return None
            probe = Case(sample.scrutinee, t.patterns, t.branches)
            if not term_eq(probe, sample):
                return None
            scrs.append((t.scrutinee, c))
        else:
            return None
    scr = add(*(scale(c, single(t)) for t, c in scrs))
    return sample, scr


# ---------------------------------------------------------------------------
# Value synthesis: closed qubit distributions recognise the named bases
# and otherwise live in the span of the computational products.


def _binder_annotation(t: PureTerm, index: int) -> Optional[Ortho]:
    if not isinstance(t, Lam):
        return None
    if index == 0:
        return t.basis if isinstance(t.basis, Ortho) else None
    for inner, _ in t.body.entries:
        got = _binder_annotation(inner, index - 1)
        if got is not None:
            return got
    return None


def _proposed_arg_doms(fun: TermDist) -> list[Type]:
    """Candidate argument types when neither side of an application can
    be synthesized: the head of the function spine is an abstraction
    literal, and its annotation at the matching binder depth proposes
    the basis span, plain first and then sharp.  Each candidate is still
    verified by the ordinary premises."""
    for t, _ in fun.entries:
        depth = 0
        while isinstance(t, App):
            t = t.fun
            depth += 1
        basis = _binder_annotation(t, depth)
        if basis is not None:
            plain = BasisType(basis)
            return [plain, Sharp(plain)]
    return []


def _std_products(n: int) -> Type:
    b: Type = BasisType(NAMED_BASES["B"])
    if n == 1:
        return b
    return Prod(b, _std_products(n - 1))


def _synth_value(d: TermDist) -> Optional[Type]:
    if not is_closed(d):
        return None
    n = qubit_arity(d)
    if n is None:
        return None
    for basis in NAMED_BASES.values():
        if any(dist_eq(d, e) for e in basis.elements):
            return BasisType(basis)
    return Sharp(_std_products(n))


class _Checker:
    def __init__(self, max_steps: int = 100000):
        self.max_steps = max_steps

    # -- main entry ---------------------------------------------------

    def check(self, ctx: Context, d: TermDist, goal: Type) -> Derivation:
        ctx = _usable(ctx, d)
        goal = sharp_normalize(goal)
        if d.is_zero():
            raise CheckError("rule not applicable", "empty distribution")
        if len(d.entries) == 1:
            t, c = d.entries[0]
            if not sc_eq(c, 1.0) and sc_eq(abs(c), 1.0):
                inner = self.check(ctx, single(t), goal)
                return _node(
                    "Phase", ctx, d, goal, (inner,), note="global phase"
                )
        errors: list[CheckError] = []

        kinds = {type(t) for t, _ in d.entries}
        if kinds == {Lam}:
            try:
                return self._check_lams(ctx, d, goal)
            except CheckError as e:
                errors.append(e)
        if kinds == {Var} and len(d.entries) == 1:
            try:
                return self._check_var(ctx, d, goal)
            except CheckError as e:
                errors.append(e)
        if kinds == {App}:
            fact = _factor_bilinear(d, lambda t: t.fun, lambda t: t.arg)
            if fact is not None:
                try:
                    return self._check_app(ctx, d, fact[0], fact[1], goal)
                except CheckError as e:
                    errors.append(e)
        if kinds == {Pair}:
            fact = _factor_bilinear(d, lambda t: t.left, lambda t: t.right)
            if fact is not None:
                try:
                    return self._check_pair(ctx, d, fact[0], fact[1], goal)
                except CheckError as e:
                    errors.append(e)
        if kinds == {LetPair}:
            fact = _factor_scrutinee(d)
            if fact is not None:
                node, scr = fact
                assert isinstance(node, LetPair)
                try:
                    return self._check_let(ctx, d, node, scr, goal)
                except CheckError as e:
                    errors.append(e)
        if kinds == {Case}:
            fact = _factor_scrutinee(d)
            if fact is not None:
                node, scr = fact
                assert isinstance(node, Case)
                try:
                    return self._check_case(ctx, d, node, scr, goal)
                except CheckError as e:
                    errors.append(e)

        if isinstance(goal, Sharp) and len(d.entries) >= 2:
            try:
                return self._check_sum(ctx, d, goal)
            except CheckError as e:
                errors.append(e)
        # The evaluation fallback must not mask a linearity violation
        # that the structural rules diagnosed.
        if is_closed(d) and not any(
            "linear variable" in e.message for e in errors
        ):
            try:
                return self._check_lit(ctx, d, goal)
            except CheckError as e:
                errors.append(e)
        raise _best_error(errors)

    # -- leaves -------------------------------------------------------

    def _check_var(self, ctx: Context, d: TermDist, goal: Type) -> Derivation:
        t, c = d.entries[0]
        assert isinstance(t, Var)
        if not sc_eq(c, 1.0):
            raise CheckError("rule not applicable", "scaled variable")
        binding = ctx[t.name]
        if isinstance(binding.basis, Ortho):
            side = subtype(BasisType(binding.basis), binding.type)
            if side is not True:
                raise CheckError(
                    "rule not applicable",
                    f"annotation basis of {t.name} does not generate its type",
                )
        axiom = _node(
            "Axiom", ctx, d, sharp_normalize(binding.type), note=t.name
        )
        return self._coerce(ctx, d, axiom, binding.type, goal)

    def _coerce(
        self,
        ctx: Context,
        d: TermDist,
        inner: Derivation,
        have: Type,
        goal: Type,
    ) -> Derivation:
        have, goal = sharp_normalize(have), sharp_normalize(goal)
        if type_eq(have, goal):
            return inner
        verdict = subtype(have, goal)
        if verdict is True:
            return _node("Sub", ctx, d, goal, (inner,))
        note = "" if verdict is False else "subtyping not decided for this pair"
        raise CheckError(
            f"subtype check failed {format_type(have)} ≤ {format_type(goal)}",
            note,
        )

    def _check_lit(self, ctx: Context, d: TermDist, goal: Type) -> Derivation:
        try:
            ok = realizes(d, goal, self.max_steps)
        except Undecidable as e:
            raise CheckError("rule not applicable", str(e))
        if not ok:
            raise CheckError(
                "rule not applicable",
                f"does not evaluate to a member of {format_type(goal)}",
            )
        return _node(
            "Lit", ctx, d, goal, note="closed term evaluated against the goal"
        )

    # -- abstractions ---------------------------------------------------

    def _check_lams(self, ctx: Context, d: TermDist, goal: Type) -> Derivation:
        lams = [t for t, _ in d.entries]
        annotation = lams[0].basis
        if not all(basis_eq(l.basis, annotation) for l in lams[1:]):
            raise CheckError(
                "rule not applicable", "abstraction bases do not match"
            )
        arrow = goal
        sub_needed = False
        if isinstance(goal, Sharp) and isinstance(goal.inner, Arrow):
            arrow = goal.inner
            sub_needed = True
        if not isinstance(arrow, Arrow):
            raise CheckError(
                "rule not applicable", "abstraction against a non-arrow goal"
            )
        var = fresh_name(
            lams[0].var,
            frozenset(ctx) | free_vars(d),
        )
        body = add(
            *(
                scale(c, subst_dist(t.body, t.var, single(Var(var))))
                for t, c in d.entries
            )
        )
        inner_ctx = dict(ctx)
        inner_ctx[var] = Binding(arrow.dom, annotation)
        premise = self.check(inner_ctx, body, arrow.cod)
        node = _node("UnitLam", ctx, d, arrow, (premise,))
        if sub_needed:
            return self._coerce(ctx, d, node, arrow, goal)
        return node

    # -- applications ---------------------------------------------------

    def _check_app(
        self,
        ctx: Context,
        d: TermDist,
        fun: TermDist,
        arg: TermDist,
        goal: Type,
    ) -> Derivation:
        ctx_f, ctx_a = _split(ctx, [free_vars(fun), free_vars(arg)])
        errors: list[CheckError] = []
        fun_type = self.synth(ctx_f, fun)
        if fun_type is not None and isinstance(
            sharp_normalize(fun_type), Arrow
        ):
            arrow = sharp_normalize(fun_type)
            try:
                fun_deriv = self.check(ctx_f, fun, arrow)
                arg_deriv = self.check(ctx_a, arg, arrow.dom)
                node = _node(
                    "App", ctx, d, arrow.cod, (fun_deriv, arg_deriv)
                )
                return self._coerce(ctx, d, node, arrow.cod, goal)
            except CheckError as e:
                errors.append(e)
        arg_type = self.synth(ctx_a, arg)
        if arg_type is not None:
            try:
                fun_deriv = self.check(ctx_f, fun, Arrow(arg_type, goal))
                arg_deriv = self.check(ctx_a, arg, arg_type)
                return _node("App", ctx, d, goal, (fun_deriv, arg_deriv))
            except CheckError as e:
                errors.append(e)
        elif fun_type is None:
            for dom in _proposed_arg_doms(fun):
                try:
                    fun_deriv = self.check(ctx_f, fun, Arrow(dom, goal))
                    arg_deriv = self.check(ctx_a, arg, dom)
                    return _node(
                        "App", ctx, d, goal, (fun_deriv, arg_deriv)
                    )
                except CheckError as e:
                    errors.append(e)
        if not errors:
            errors.append(
                CheckError(
                    "rule not applicable",
                    "cannot determine the type of either side of an application",
                )
            )
        raise _best_error(errors)

    def synth(self, ctx: Context, d: TermDist) -> Optional[Type]:
        """A type for the distribution when one is apparent: a variable's
        recorded type, an application of a synthesizable function, a
        closed qubit value, or a factorable pair."""
        if len(d.entries) == 1 and isinstance(d.entries[0][0], Var):
            name = d.entries[0][0].name
            if name in ctx and sc_eq(d.entries[0][1], 1.0):
                return sharp_normalize(ctx[name].type)
        value_type = _synth_value(d)
        if value_type is not None:
            return value_type
        kinds = {type(t) for t, _ in d.entries}
        if kinds == {App}:
            fact = _factor_bilinear(d, lambda t: t.fun, lambda t: t.arg)
            if fact is None:
                return None
            fun_type = self.synth(
                {x: b for x, b in ctx.items() if x in free_vars(fact[0])},
                fact[0],
            )
            if fun_type is None or not isinstance(
                sharp_normalize(fun_type), Arrow
            ):
                return None
            arrow = sharp_normalize(fun_type)
            ctx_a = {
                x: b for x, b in ctx.items() if x in free_vars(fact[1])
            }
            try:
                self.check(ctx_a, fact[1], arrow.dom)
            except CheckError:
                return None
            return arrow.cod
        if kinds == {Pair}:
            fact = _factor_bilinear(d, lambda t: t.left, lambda t: t.right)
            if fact is None:
                return None
            left = self.synth(
                {x: b for x, b in ctx.items() if x in free_vars(fact[0])},
                fact[0],
            )
            right = self.synth(
                {x: b for x, b in ctx.items() if x in free_vars(fact[1])},
                fact[1],
            )
            if left is None or right is None:
                return None
            return Prod(left, right)
        return None

    # -- pairs ----------------------------------------------------------

    def _check_pair(
        self,
        ctx: Context,
        d: TermDist,
        left: TermDist,
        right: TermDist,
        goal: Type,
    ) -> Derivation:
        ctx_l, ctx_r = _split(ctx, [free_vars(left), free_vars(right)])
        errors: list[CheckError] = []
        candidates: list[tuple[Prod, bool]] = []
        if isinstance(goal, Prod):
            candidates.append((goal, False))
        elif isinstance(goal, Sharp) and isinstance(goal.inner, Prod):
            inner = goal.inner
            candidates.append(
                (Prod(Sharp(inner.left), Sharp(inner.right)), True)
            )
            candidates.append((inner, True))
        for prod, needs_sub in candidates:
            try:
                left_d = self.check(ctx_l, left, prod.left)
                right_d = self.check(ctx_r, right, prod.right)
                node = _node("Pair", ctx, d, prod, (left_d, right_d))
                if needs_sub:
                    return self._coerce(ctx, d, node, prod, goal)
                return node
            except CheckError as e:
                errors.append(e)
        if not errors:
            errors.append(
                CheckError("rule not applicable", "pair against a non-product goal")
            )
        raise _best_error(errors)

    # -- let ------------------------------------------------------------

    def _check_let(
        self,
        ctx: Context,
        d: TermDist,
        node: LetPair,
        scrutinee: TermDist,
        goal: Type,
    ) -> Derivation:
        body = node.body
        ctx_s, ctx_b = _split(
            ctx,
            [free_vars(scrutinee), free_vars(body) - {node.var1, node.var2}],
        )
        var1, body = _rebind(ctx, node.var1, body)
        var2, body = _rebind(ctx, node.var2, body)
        errors: list[CheckError] = []

        # plain let over a product
        product: Optional[Prod] = None
        synthesized = self.synth(ctx_s, scrutinee)
        if synthesized is not None and isinstance(
            sharp_normalize(synthesized), Prod
        ):
            product = sharp_normalize(synthesized)
        elif isinstance(node.basis1, Ortho) and isinstance(node.basis2, Ortho):
            product = Prod(BasisType(node.basis1), BasisType(node.basis2))
        if product is not None:
            try:
                scr_d = self.check(ctx_s, scrutinee, product)
                inner_ctx = dict(ctx_b)
                inner_ctx[var1] = Binding(product.left, node.basis1)
                inner_ctx[var2] = Binding(product.right, node.basis2)
                body_d = self.check(inner_ctx, body, goal)
                return _node("LetPair", ctx, d, goal, (scr_d, body_d))
            except CheckError as e:
                errors.append(e)

        # tensor let: sharp scrutinee, sharp binders, sharp conclusion
        if (
            isinstance(goal, Sharp)
            and isinstance(node.basis1, Ortho)
            and isinstance(node.basis2, Ortho)
        ):
            scr_goal = Sharp(
                Prod(BasisType(node.basis1), BasisType(node.basis2))
            )
            for body_goal in (goal.inner, goal):
                try:
                    scr_d = self.check(ctx_s, scrutinee, scr_goal)
                    inner_ctx = dict(ctx_b)
                    inner_ctx[var1] = Binding(
                        Sharp(BasisType(node.basis1)), node.basis1
                    )
                    inner_ctx[var2] = Binding(
                        Sharp(BasisType(node.basis2)), node.basis2
                    )
                    body_d = self.check(inner_ctx, body, body_goal)
                    return _node(
                        "LetTensor", ctx, d, goal, (scr_d, body_d)
                    )
                except CheckError as e:
                    errors.append(e)
        else:
            errors.append(
                CheckError(
                    "rule not applicable",
                    "tensor let needs a sharp goal and basis annotations",
                )
            )

        try:
            return self._sem_judge(ctx, d, goal)
        except CheckError as e:
            errors.append(e)
        raise _best_error(errors)

    # -- case -------------------------------------------------------------

    def _check_case(
        self,
        ctx: Context,
        d: TermDist,
        node: Case,
        scrutinee: TermDist,
        goal: Type,
    ) -> Derivation:
        fv_branches = frozenset().union(
            *(free_vars(b) for b in node.branches)
        )
        ctx_s, ctx_b = _split(ctx, [free_vars(scrutinee), fv_branches])
        pattern_type = BasisType(Ortho(node.patterns))
        errors: list[CheckError] = []

        # finite case: scrutinee inhabits the pattern basis itself
        try:
            scr_d = self.check(ctx_s, scrutinee, pattern_type)
            branch_ds = tuple(
                self.check(ctx_b, b, goal) for b in node.branches
            )
            return _node("Case", ctx, d, goal, (scr_d,) + branch_ds)
        except CheckError as e:
            errors.append(e)

        # unitary case: sharp scrutinee, orthogonal branches, sharp goal
        if isinstance(goal, Sharp):
            for branch_goal in (goal.inner, goal):
                try:
                    scr_d = self.check(ctx_s, scrutinee, Sharp(pattern_type))
                    branch_ds = tuple(
                        self.check(ctx_b, b, branch_goal)
                        for b in node.branches
                    )
                    for i in range(len(node.branches)):
                        for j in range(i + 1, len(node.branches)):
                            if not check_orthogonality(
                                ctx_b,
                                {},
                                node.branches[i],
                                {},
                                node.branches[j],
                                branch_goal,
                                max_steps=self.max_steps,
                            ):
                                raise CheckError(
                                    "orthogonality premise failed "
                                    f"(branches {i},{j})"
                                )
                    return _node(
                        "UnitCase", ctx, d, goal, (scr_d,) + branch_ds
                    )
                except CheckError as e:
                    errors.append(e)
        try:
            return self._sem_judge(ctx, d, goal)
        except CheckError as e:
            errors.append(e)
        raise _best_error(errors)

    # -- sums -------------------------------------------------------------

    def _check_sum(self, ctx: Context, d: TermDist, goal: Sharp) -> Derivation:
        weight = sum(abs(c) ** 2 for _, c in d.entries)
        if not sc_eq(weight, 1.0):
            raise CheckError(
                "rule not applicable",
                f"squared coefficients sum to {weight:.6g}, not 1",
            )
        errors: list[CheckError] = []
        for part_goal in (goal.inner, goal):
            try:
                premises = tuple(
                    self.check(ctx, single(t), part_goal)
                    for t, _ in d.entries
                )
                for i in range(len(d.entries)):
                    for j in range(i + 1, len(d.entries)):
                        if not check_orthogonality(
                            ctx,
                            {},
                            single(d.entries[i][0]),
                            {},
                            single(d.entries[j][0]),
                            part_goal,
                            max_steps=self.max_steps,
                        ):
                            raise CheckError(
                                f"orthogonality premise failed (branches {i},{j})"
                            )
                return _node("Sum", ctx, d, goal, premises)
            except CheckError as e:
                errors.append(e)
        raise _best_error(errors)

    # -- semantic fallback -------------------------------------------------

    def _sem_judge(self, ctx: Context, d: TermDist, goal: Type) -> Derivation:
        basis_pools: list[tuple[str, list[TermDist], Basis]] = []
        sharp_var: Optional[tuple[str, list[TermDist], Basis]] = None
        for x, b in sorted(ctx.items()):
            tn = sharp_normalize(b.type)
            members = finite_members(tn)
            if members is not None:
                basis_pools.append((x, members, b.basis))
                continue
            gens = span_generators(tn) if isinstance(tn, Sharp) else None
            if gens is not None and sharp_var is None:
                sharp_var = (x, gens, b.basis)
                continue
            raise CheckError("context not basis-enumerable", f"variable {x}")

        names = [x for x, _, _ in basis_pools]
        pools = [members for _, members, _ in basis_pools]
        bases = {x: basis for x, _, basis in basis_pools}
        for combo in itertools.product(*pools) if pools else [()]:
            sigma = {
                x: (value, bases[x]) for x, value in zip(names, combo)
            }
            if sharp_var is None:
                if not realizes(apply_sigma(d, sigma), goal, self.max_steps):
                    raise CheckError(
                        "rule not applicable",
                        "semantic check failed on an enumerated substitution",
                    )
                continue
            name, gens, basis = sharp_var
            images: list[TermDist] = []
            for g in gens:
                full = dict(sigma)
                full[name] = (g, basis)
                trace = evaluate(apply_sigma(d, full), self.max_steps)
                if not isinstance(trace.final, NormalForm):
                    raise CheckError(
                        "rule not applicable",
                        "semantic check: an instance does not reach a value",
                    )
                images.append(trace.final.dist)
            self._sem_linear_images(images, goal)
        note = "semantic judgement over the enumerated context"
        return _node("Sem", ctx, d, goal, note=note)

    def _sem_linear_images(self, images: list[TermDist], goal: Type) -> None:
        """The images of an orthonormal generating family decide the goal
        for every unit combination, using linearity of the instantiation:
        orthonormal images landing in a span goal, or pairwise rank-one
        sums landing in a product goal."""
        try:
            if len(images) == 1:
                if not is_member_phase(images[0], goal):
                    raise CheckError(
                        "rule not applicable", "semantic image check failed"
                    )
                return
            for w in images:
                if not is_member(w, goal):
                    raise CheckError(
                        "rule not applicable", "semantic image check failed"
                    )
            for i in range(len(images)):
                for j in range(i + 1, len(images)):
                    if not sc_is_zero(inner_product(images[i], images[j])):
                        raise CheckError(
                            "rule not applicable",
                            "semantic images are not orthogonal",
                        )
            if isinstance(goal, Sharp):
                return
            if isinstance(goal, Prod):
                half = 2 ** -0.5
                for i in range(len(images)):
                    for j in range(i + 1, len(images)):
                        for phase in (1, 1j):
                            combo = add(
                                scale(half, images[i]),
                                scale(half * phase, images[j]),
                            )
                            if not is_member(combo, goal):
                                raise CheckError(
                                    "rule not applicable",
                                    "a combination of semantic images "
                                    "leaves the goal",
                                )
                return
            raise CheckError(
                "rule not applicable",
                "goal shape not closed under the enumerated combinations",
            )
        except Undecidable as e:
            raise CheckError("rule not applicable", str(e))


def _best_error(errors: list[CheckError]) -> CheckError:
    if not errors:
        return CheckError("rule not applicable")
    ranked = sorted(
        errors,
        key=lambda e: (
            0 if "linear variable" in e.message
            else 1 if "orthogonality" in e.message
            else 2 if "subtype check failed" in e.message
            else 3 if "context not basis-enumerable" in e.message
            else 4
        ),
    )
    return ranked[0]


# ---------------------------------------------------------------------------
# Public entry points.


def check(
    ctx: Union[Context, dict],
    term: TermDist,
    goal: Type,
    max_steps: int = 100000,
) -> Derivation:
    return _Checker(max_steps).check(_coerce_ctx(ctx), term, goal)


def _coerce_ctx(ctx: Union[Context, dict]) -> Context:
    out: Context = {}
    for x, b in ctx.items():
        if isinstance(b, Binding):
            out[x] = b
        else:
            ty, basis = b
            out[x] = Binding(ty, basis)
    return out


def _enumerate_context(
    ctx: Context,
) -> list[dict[str, tuple[TermDist, Basis]]]:
    names: list[str] = []
    pools: list[list[TermDist]] = []
    bases: list[Basis] = []
    for x, b in sorted(ctx.items()):
        tn = sharp_normalize(b.type)
        members = finite_members(tn)
        if members is None and isinstance(tn, Sharp):
            members = span_generators(tn)
        if members is None:
            raise CheckError("context not basis-enumerable", f"variable {x}")
        names.append(x)
        pools.append(members)
        bases.append(b.basis)
    out = []
    for combo in itertools.product(*pools) if pools else [()]:
        out.append(
            {
                x: (value, basis)
                for x, value, basis in zip(names, combo, bases)
            }
        )
    return out


def check_orthogonality(
    gamma: Union[Context, dict],
    delta1: Union[Context, dict],
    t: TermDist,
    delta2: Union[Context, dict],
    s: TermDist,
    goal: Type,
    max_steps: int = 100000,
) -> bool:
    """The orthogonality judgement: under every pair of independent
    substitutions for the two contexts, both sides reduce to values with
    inner product zero.  Sharp variables range over span generators,
    which suffices by linearity."""
    gamma = _coerce_ctx(gamma)
    left = dict(gamma)
    left.update(_coerce_ctx(delta1))
    right = dict(gamma)
    right.update(_coerce_ctx(delta2))
    left_subs = _enumerate_context(
        {x: b for x, b in left.items() if x in free_vars(t)}
    )
    right_subs = _enumerate_context(
        {x: b for x, b in right.items() if x in free_vars(s)}
    )
    lefts = []
    for sigma in left_subs:
        trace = evaluate(apply_sigma(t, sigma), max_steps)
        if not isinstance(trace.final, NormalForm):
            return False
        lefts.append(trace.final.dist)
    rights = []
    for tau in right_subs:
        trace = evaluate(apply_sigma(s, tau), max_steps)
        if not isinstance(trace.final, NormalForm):
            return False
        rights.append(trace.final.dist)
    return all(
        sc_is_zero(inner_product(v, w)) for v in lefts for w in rights
    )


@dataclass
class HarnessStep:
    index: int
    rule: str
    ok: bool
    message: str = ""


@dataclass
class HarnessReport:
    ok: bool
    steps: list[HarnessStep] = field(default_factory=list)
    failure: str = ""


def subject_reduction_harness(
    ctx: Union[Context, dict],
    term: TermDist,
    goal: Type,
    max_steps: int = 100000,
) -> HarnessReport:
    """Re-check the judgement at every reduction step of the term."""
    ctx = _coerce_ctx(ctx)
    report = HarnessReport(ok=True)
    try:
        check(ctx, term, goal, max_steps)
    except CheckError as e:
        return HarnessReport(ok=False, failure=f"initial judgement: {e}")
    trace = evaluate(term, max_steps)
    for i, (dist, rule) in enumerate(trace.steps):
        try:
            check(ctx, dist, goal, max_steps)
            report.steps.append(HarnessStep(i, str(rule), True))
        except CheckError as e:
            report.steps.append(HarnessStep(i, str(rule), False, str(e)))
            report.ok = False
    if not isinstance(trace.final, NormalForm):
        report.ok = False
        reason = (
            trace.final.reason
            if hasattr(trace.final, "reason")
            else "no normal form"
        )
        report.failure = f"evaluation did not finish: {reason}"
    return report
