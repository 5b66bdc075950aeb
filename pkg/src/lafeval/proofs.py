"""Checker for line-numbered natural-deduction proofs.

The rule set is deliberately small: conjunction elimination (one
flattened conjunct per step), k-ary conjunction introduction (k >= 2, in
citation order), modus ponens, and conditional proof (hypothesis
discharge).  Subproofs are tracked with a scope stack, so they may nest;
once a subproof is discharged its lines become unusable.

A proof is *accepted* only if every line is licensed by its cited rule,
every hypothesis is discharged, and the final line matches the goal up to
conjunction flattening.  Rejection is a verdict (failing line + reason),
not an exception.

Script text format (``#`` starts a comment line)::

    proof <name>
    premise <k>: <formula>
    goal: <formula>
    step <k>: <formula> by <premise|hypothesis|andE s|andI s,s[,s...]|mp s,s|condproof s-s>
    qed

Premise lines double as numbered proof lines, so later steps cite them
directly; premise and step numbering is one contiguous sequence from 1.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Sequence, Union

from .formulas import (
    Atom,
    Conjunction,
    Formula,
    FormulaSyntaxError,
    Implication,
    atoms,
    conjunction,
    entails,
    normalize,
    normalize_equal,
    parse_formula,
)

__all__ = [
    "Premise",
    "Hypothesis",
    "AndElim",
    "AndIntro",
    "ModusPonens",
    "ConditionalProof",
    "ProofStep",
    "ProofScript",
    "Verdict",
    "ProofSyntaxError",
    "ScriptReport",
    "check_proof",
    "entailment_check",
    "parse_proof_script",
    "load_bundled_scripts",
    "verify_bundled_proofs",
    "CORPUS_ENV_VAR",
]

CORPUS_ENV_VAR = "LAF_CORPUS_DIR"


@dataclass(frozen=True)
class Premise:
    pass


@dataclass(frozen=True)
class Hypothesis:
    pass


@dataclass(frozen=True)
class AndElim:
    source: int


@dataclass(frozen=True)
class AndIntro:
    sources: tuple[int, ...]


@dataclass(frozen=True)
class ModusPonens:
    implication: int
    antecedent: int


@dataclass(frozen=True)
class ConditionalProof:
    first: int
    last: int


Justification = Union[Premise, Hypothesis, AndElim, AndIntro, ModusPonens, ConditionalProof]


@dataclass(frozen=True)
class ProofStep:
    index: int
    formula: Formula
    justification: Justification


@dataclass(frozen=True)
class ProofScript:
    name: str
    premises: tuple[Formula, ...]
    goal: Formula
    steps: tuple[ProofStep, ...]


@dataclass(frozen=True)
class Verdict:
    accepted: bool
    step: int | None = None
    reason: str | None = None

    @classmethod
    def accept(cls) -> "Verdict":
        return cls(True)

    @classmethod
    def reject(cls, step: int, reason: str) -> "Verdict":
        return cls(False, step, reason)

    def __str__(self) -> str:
        if self.accepted:
            return "accepted"
        return f"rejected at step {self.step}: {self.reason}"


class ProofSyntaxError(ValueError):
    """Bad proof-script text; ``line`` is the 1-based source line."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class _Checker:
    """Single left-to-right pass with a scope stack.

    ``self.lines`` maps index -> (formula, scope id).  A cited line is
    usable iff its scope is still on the stack; discharged scopes are
    popped, so their lines become invisible.  Scope id 0 is the root;
    hypothesis scopes are identified by their hypothesis line index.
    """

    def __init__(self, script: ProofScript):
        self.script = script
        self.lines: dict[int, tuple[Formula, int]] = {}
        # (scope id, hypothesis index, hypothesis formula); root sentinel first
        self.stack: list[tuple[int, int | None, Formula | None]] = [(0, None, None)]
        self.contexts: dict[int, tuple[Formula, ...]] = {}

    def open_scope_ids(self) -> set[int]:
        return {scope_id for scope_id, _, _ in self.stack}

    def open_hypotheses(self) -> tuple[Formula, ...]:
        return tuple(h for _, _, h in self.stack if h is not None)

    def cited(self, step: ProofStep, ref: int) -> Formula | None:
        """Formula of a cited line, or None (with no verdict) if unusable."""
        if ref >= step.index:
            return None
        entry = self.lines.get(ref)
        if entry is None:
            return None
        formula, scope_id = entry
        if scope_id not in self.open_scope_ids():
            return None
        return formula

    def run(self) -> Verdict:
        previous_index = 0
        for step in self.script.steps:
            if step.index <= previous_index:
                return Verdict.reject(step.index, "step indices must strictly increase")
            previous_index = step.index
            verdict = self.check_step(step)
            if verdict is not None:
                return verdict
        if len(self.stack) > 1:
            hyp_index = self.stack[-1][1]
            assert hyp_index is not None
            return Verdict.reject(hyp_index, "hypothesis never discharged")
        if not self.script.steps:
            return Verdict.reject(0, "proof has no steps")
        last = self.script.steps[-1]
        if not normalize_equal(last.formula, self.script.goal):
            return Verdict.reject(last.index, "final formula does not match goal")
        return Verdict.accept()

    def check_step(self, step: ProofStep) -> Verdict | None:
        just = step.justification
        scope_id = self.stack[-1][0]

        if isinstance(just, Premise):
            if not any(normalize_equal(step.formula, p) for p in self.script.premises):
                return Verdict.reject(step.index, "formula is not in the premise list")

        elif isinstance(just, Hypothesis):
            scope_id = step.index
            self.stack.append((scope_id, step.index, step.formula))

        elif isinstance(just, AndElim):
            source = self.cited(step, just.source)
            if source is None:
                return Verdict.reject(
                    step.index, f"citation {just.source} is not a usable earlier step"
                )
            source = normalize(source)
            if not isinstance(source, Conjunction):
                return Verdict.reject(step.index, "cited step is not a conjunction")
            if not any(normalize_equal(step.formula, part) for part in source.parts):
                return Verdict.reject(
                    step.index, "formula is not a conjunct of the cited step"
                )

        elif isinstance(just, AndIntro):
            if len(just.sources) < 2:
                return Verdict.reject(
                    step.index, "conjunction introduction needs at least two citations"
                )
            parts = []
            for ref in just.sources:
                cited = self.cited(step, ref)
                if cited is None:
                    return Verdict.reject(
                        step.index, f"citation {ref} is not a usable earlier step"
                    )
                parts.append(cited)
            if not normalize_equal(step.formula, conjunction(parts)):
                return Verdict.reject(
                    step.index,
                    "formula is not the conjunction of the cited steps in citation order",
                )

        elif isinstance(just, ModusPonens):
            implication = self.cited(step, just.implication)
            if implication is None:
                return Verdict.reject(
                    step.index,
                    f"citation {just.implication} is not a usable earlier step",
                )
            antecedent = self.cited(step, just.antecedent)
            if antecedent is None:
                return Verdict.reject(
                    step.index,
                    f"citation {just.antecedent} is not a usable earlier step",
                )
            implication = normalize(implication)
            if not isinstance(implication, Implication):
                return Verdict.reject(step.index, "cited step is not an implication")
            if not normalize_equal(implication.antecedent, antecedent):
                return Verdict.reject(
                    step.index, "cited antecedent does not match the implication"
                )
            if not normalize_equal(step.formula, implication.consequent):
                return Verdict.reject(
                    step.index, "formula does not match the implication consequent"
                )

        elif isinstance(just, ConditionalProof):
            _, hyp_index, hyp_formula = self.stack[-1]
            if hyp_index is None:
                return Verdict.reject(step.index, "no open hypothesis to discharge")
            if hyp_index != just.first:
                return Verdict.reject(
                    step.index,
                    f"conditional proof must close the innermost subproof "
                    f"(opened at step {hyp_index})",
                )
            if just.last < just.first:
                return Verdict.reject(
                    step.index, "subproof end precedes its hypothesis"
                )
            last_formula = self.cited(step, just.last)
            if last_formula is None:
                return Verdict.reject(
                    step.index, f"citation {just.last} is not a usable earlier step"
                )
            assert hyp_formula is not None
            if not normalize_equal(step.formula, Implication(hyp_formula, last_formula)):
                return Verdict.reject(
                    step.index, "formula does not match hypothesis -> last step"
                )
            self.stack.pop()
            scope_id = self.stack[-1][0]

        else:  # pragma: no cover - justification union is closed
            return Verdict.reject(step.index, "unknown justification")

        self.lines[step.index] = (step.formula, scope_id)
        self.contexts[step.index] = self.open_hypotheses()
        return None


def check_proof(script: ProofScript) -> Verdict:
    """Verify every step; accepted iff the whole derivation is licensed."""
    return _Checker(script).run()


def entailment_check(script: ProofScript) -> dict[int, bool]:
    """Semantic soundness of an accepted script, line by line.

    For every non-hypothesis line, brute-force truth tables decide
    whether the premises plus the hypotheses open at that line entail the
    line's formula.  Raises if the script is not accepted first.
    """
    checker = _Checker(script)
    verdict = checker.run()
    if not verdict.accepted:
        raise ValueError(f"script {script.name!r} is not accepted: {verdict}")
    results: dict[int, bool] = {}
    for step in script.steps:
        if isinstance(step.justification, Hypothesis):
            continue
        context = list(script.premises) + list(checker.contexts[step.index])
        results[step.index] = entails(context, step.formula)
    return results


# -- text format --------------------------------------------------------------

_PROOF_RE = re.compile(r"proof\s+([A-Za-z0-9_-]+)\s*$")
_PREMISE_RE = re.compile(r"premise\s+(\d+)\s*:\s*(.+)$")
_GOAL_RE = re.compile(r"goal\s*:\s*(.+)$")
# greedy formula group: the split lands on the last ' by ', so 'by' stays
# usable as an atom name
_STEP_RE = re.compile(r"step\s+(\d+)\s*:\s*(.+)\s+by\s+(.+)$")
_ANDE_RE = re.compile(r"andE\s+(\d+)\s*$")
_ANDI_RE = re.compile(r"andI\s+(\d+(?:\s*,\s*\d+)+)\s*$")
_MP_RE = re.compile(r"mp\s+(\d+)\s*,\s*(\d+)\s*$")
_CONDPROOF_RE = re.compile(r"condproof\s+(\d+)\s*-\s*(\d+)\s*$")


def _parse_justification(text: str, lineno: int) -> Justification:
    text = text.strip()
    if text == "premise":
        return Premise()
    if text == "hypothesis":
        return Hypothesis()
    if m := _ANDE_RE.fullmatch(text):
        return AndElim(int(m.group(1)))
    if m := _ANDI_RE.fullmatch(text):
        return AndIntro(tuple(int(s) for s in m.group(1).replace(" ", "").split(",")))
    if m := _MP_RE.fullmatch(text):
        return ModusPonens(int(m.group(1)), int(m.group(2)))
    if m := _CONDPROOF_RE.fullmatch(text):
        return ConditionalProof(int(m.group(1)), int(m.group(2)))
    raise ProofSyntaxError(f"unrecognized justification {text!r}", lineno)


def _parse_script_formula(text: str, lineno: int) -> Formula:
    try:
        return parse_formula(text)
    except FormulaSyntaxError as exc:
        raise ProofSyntaxError(f"bad formula: {exc}", lineno) from exc


def parse_proof_script(text: str) -> ProofScript:
    """Parse one script from text; raises :class:`ProofSyntaxError`."""
    name: str | None = None
    premises: list[Formula] = []
    goal: Formula | None = None
    steps: list[ProofStep] = []
    seen_qed = False
    next_index = 1

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if seen_qed:
            raise ProofSyntaxError("content after qed", lineno)
        if name is None:
            m = _PROOF_RE.fullmatch(line)
            if m is None:
                raise ProofSyntaxError("expected 'proof <name>' header", lineno)
            name = m.group(1)
            continue
        if line == "qed":
            seen_qed = True
            continue
        if m := _PREMISE_RE.fullmatch(line):
            if goal is not None or any(
                not isinstance(s.justification, Premise) for s in steps
            ):
                raise ProofSyntaxError("premises must precede goal and steps", lineno)
            index = int(m.group(1))
            if index != next_index:
                raise ProofSyntaxError(
                    f"expected premise {next_index}, got {index}", lineno
                )
            formula = _parse_script_formula(m.group(2), lineno)
            premises.append(formula)
            steps.append(ProofStep(index, formula, Premise()))
            next_index += 1
            continue
        if m := _GOAL_RE.fullmatch(line):
            if goal is not None:
                raise ProofSyntaxError("duplicate goal", lineno)
            goal = _parse_script_formula(m.group(1), lineno)
            continue
        if m := _STEP_RE.fullmatch(line):
            if goal is None:
                raise ProofSyntaxError("goal must precede steps", lineno)
            index = int(m.group(1))
            if index != next_index:
                raise ProofSyntaxError(f"expected step {next_index}, got {index}", lineno)
            formula = _parse_script_formula(m.group(2), lineno)
            steps.append(ProofStep(index, formula, _parse_justification(m.group(3), lineno)))
            next_index += 1
            continue
        raise ProofSyntaxError(f"unrecognized line {line!r}", lineno)

    final = len(text.splitlines()) or 1
    if name is None:
        raise ProofSyntaxError("missing 'proof <name>' header", final)
    if goal is None:
        raise ProofSyntaxError("missing goal", final)
    if not seen_qed:
        raise ProofSyntaxError("missing qed", final)
    return ProofScript(name, tuple(premises), goal, tuple(steps))


# -- bundled corpus ------------------------------------------------------------


@dataclass(frozen=True)
class ScriptReport:
    name: str
    step_count: int
    verdict: Verdict


def _default_corpus_dir() -> Path | None:
    env = os.environ.get(CORPUS_ENV_VAR)
    if env:
        return Path(env)
    return None


def load_bundled_scripts(corpus_dir: str | Path | None = None) -> list[ProofScript]:
    """Load every ``*.proof`` script, sorted by filename.

    ``corpus_dir`` falls back to ``$LAF_CORPUS_DIR`` and then to the
    corpus shipped with the package.
    """
    if corpus_dir is None:
        corpus_dir = _default_corpus_dir()
    if corpus_dir is not None:
        root = Path(corpus_dir)
        files = sorted(root.glob("*.proof"))
        if not files:
            raise FileNotFoundError(f"no *.proof files in {root}")
        return [parse_proof_script(f.read_text("utf-8")) for f in files]
    package_dir = resources.files("lafeval").joinpath("data/proofs")
    scripts = []
    for entry in sorted(package_dir.iterdir(), key=lambda e: e.name):
        if entry.name.endswith(".proof"):
            scripts.append(parse_proof_script(entry.read_text("utf-8")))
    return scripts


def verify_bundled_proofs(corpus_dir: str | Path | None = None) -> list[ScriptReport]:
    """Check every bundled script; one report row per script."""
    return [
        ScriptReport(script.name, len(script.steps), check_proof(script))
        for script in load_bundled_scripts(corpus_dir)
    ]


def all_accepted(reports: Sequence[ScriptReport]) -> bool:
    return all(report.verdict.accepted for report in reports)


def script_atom_count(script: ProofScript) -> int:
    """Number of distinct atoms across premises, goal, and steps."""
    return len(atoms(list(script.premises) + [script.goal] + [s.formula for s in script.steps]))
