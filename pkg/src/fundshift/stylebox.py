"""Style-box classification and risk-shift intensity grading.

Each regime's three-factor fit maps to one of nine size/value boxes:
the size axis reads the SMB loading (significantly positive = Small,
significantly negative = Large, insignificant = Mid), the value axis
reads HML the same way (Value / Growth / Blend). Breaks are graded by
how the loadings moved:

* Rotation: a loading stays significant but flips sign (worst),
* Drift: a loading crosses between significant and insignificant,
* Strengthen / Weaken: sign and significance hold, magnitude moves,
* Unchanged: nothing moved beyond tolerance.

A fund-level break grade is the more severe of its SMB and HML grades.
Adjacent regime pairs accumulate into a 9x9 transition matrix whose
diagonal, by construction, holds exactly the breaks that kept the box.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .breaks import BreakSet, with_style_flags
from .marketdata import AlignedSample
from .regress import DEFAULT_SIG_LEVEL, FactorLoading, RegressionResult, fit_ff3, subsample

#: Loading-magnitude move below this is noise, not a strengthen/weaken.
DEFAULT_SHIFT_TOL = 1e-6


class StyleError(ValueError):
    """Inputs unusable for style classification."""


class SizeClass(Enum):
    LARGE = "Large"
    MID = "Mid"
    SMALL = "Small"


class ValueClass(Enum):
    VALUE = "Value"
    BLEND = "Blend"
    GROWTH = "Growth"


#: Canonical axis orders (row/column order of the transition matrix).
_SIZE_ORDER = (SizeClass.LARGE, SizeClass.MID, SizeClass.SMALL)
_VALUE_ORDER = (ValueClass.VALUE, ValueClass.BLEND, ValueClass.GROWTH)


@dataclass(frozen=True)
class StyleBox:
    """One cell of the 3x3 size/value grid."""

    size: SizeClass
    value: ValueClass

    @property
    def index(self) -> int:
        """Canonical position 0..8 (Large Value first, Small Growth last)."""
        return _SIZE_ORDER.index(self.size) * 3 + _VALUE_ORDER.index(self.value)

    @property
    def label(self) -> str:
        return f"{self.size.value} {self.value.value}"


#: All nine boxes in canonical order.
STYLE_BOX_ORDER: tuple[StyleBox, ...] = tuple(
    StyleBox(size=s, value=v) for s in _SIZE_ORDER for v in _VALUE_ORDER
)

STYLE_BOX_LABELS: tuple[str, ...] = tuple(box.label for box in STYLE_BOX_ORDER)


def style_box_from_label(label: str) -> StyleBox:
    for box in STYLE_BOX_ORDER:
        if box.label == label:
            return box
    raise StyleError(f"unknown style box label {label!r}")


class IntensityClass(Enum):
    ROTATION = "Rotation"
    DRIFT = "Drift"
    STRENGTHEN = "Strengthen"
    WEAKEN = "Weaken"
    UNCHANGED = "Unchanged"


#: Severity ranks; Strengthen and Weaken tie by design.
_SEVERITY = {
    IntensityClass.ROTATION: 4,
    IntensityClass.DRIFT: 3,
    IntensityClass.STRENGTHEN: 2,
    IntensityClass.WEAKEN: 2,
    IntensityClass.UNCHANGED: 1,
}


def severity(intensity: IntensityClass) -> int:
    return _SEVERITY[intensity]


@dataclass(frozen=True)
class FactorState:
    """Sign and significance of one loading, as the taxonomy sees it."""

    beta: float
    significant: bool
    sign: int

    def __post_init__(self) -> None:
        if self.sign not in (-1, 0, 1):
            raise StyleError(f"FactorState: sign must be -1, 0 or 1, got {self.sign!r}")
        expected = 0 if self.beta == 0.0 else (1 if self.beta > 0.0 else -1)
        if self.sign != expected:
            raise StyleError(f"FactorState: sign {self.sign} inconsistent with beta {self.beta!r}")

    @property
    def sign_char(self) -> str:
        return {1: "+", -1: "-", 0: "0"}[self.sign]


def factor_state(loading: FactorLoading) -> FactorState:
    sign = 0 if loading.coef == 0.0 else (1 if loading.coef > 0.0 else -1)
    return FactorState(beta=loading.coef, significant=loading.significant, sign=sign)


def classify_size(state: FactorState) -> SizeClass:
    """SMB loading to size class: positive tilts small, negative large."""
    if state.significant and state.beta > 0.0:
        return SizeClass.SMALL
    if state.significant and state.beta < 0.0:
        return SizeClass.LARGE
    return SizeClass.MID


def classify_value(state: FactorState) -> ValueClass:
    """HML loading to value class: positive tilts value, negative growth."""
    if state.significant and state.beta > 0.0:
        return ValueClass.VALUE
    if state.significant and state.beta < 0.0:
        return ValueClass.GROWTH
    return ValueClass.BLEND


def style_of(fit: RegressionResult) -> StyleBox:
    """Compose the box from a fit's SMB and HML states."""
    return StyleBox(
        size=classify_size(factor_state(fit.loading("smb"))),
        value=classify_value(factor_state(fit.loading("hml"))),
    )


def classify_factor_shift(
    before: FactorState, after: FactorState, tol: float = DEFAULT_SHIFT_TOL
) -> IntensityClass:
    """Grade one loading's move across a break.

    Branch order matters: a significant sign flip outranks everything,
    then any significance change, then magnitude moves within the same
    sign and status. Pairs that fit none of these (for example an
    insignificant sign flip) are Unchanged.
    """
    if before.significant and after.significant and before.sign * after.sign == -1:
        return IntensityClass.ROTATION
    if before.significant != after.significant:
        return IntensityClass.DRIFT
    if before.sign == after.sign:
        if abs(after.beta) > abs(before.beta) + tol:
            return IntensityClass.STRENGTHEN
        if abs(after.beta) < abs(before.beta) - tol:
            return IntensityClass.WEAKEN
    return IntensityClass.UNCHANGED


def fund_shift_intensity(
    smb_shift: IntensityClass, hml_shift: IntensityClass
) -> IntensityClass:
    """The more severe of the two per-factor grades (SMB wins ties)."""
    return smb_shift if severity(smb_shift) >= severity(hml_shift) else hml_shift


@dataclass(frozen=True)
class RegimeStyle:
    """One regime's window, its three-factor fit and the resulting box."""

    window: tuple[int, int]
    fit: RegressionResult
    box: StyleBox


def regime_styles(
    sample: AlignedSample,
    bs: BreakSet,
    sig_level: float = DEFAULT_SIG_LEVEL,
    hac: bool = False,
) -> tuple[RegimeStyle, ...]:
    """Fit the three-factor model per regime and classify each one."""
    out = []
    for start, end in bs.regime_windows:
        fit = fit_ff3(subsample(sample, start, end), sig_level=sig_level, hac=hac)
        out.append(RegimeStyle(window=(start, end), fit=fit, box=style_of(fit)))
    return tuple(out)


@dataclass(frozen=True)
class FactorShift:
    """One loading's before/after states and grade at one break."""

    factor: str
    before: FactorState
    after: FactorState
    intensity: IntensityClass


@dataclass(frozen=True)
class BreakShift:
    """Full grading of one break: both factors plus the fund-level grade."""

    break_index: int
    smb: FactorShift
    hml: FactorShift
    intensity: IntensityClass
    style_from: StyleBox
    style_to: StyleBox

    @property
    def is_style_break(self) -> bool:
        return self.intensity is not IntensityClass.UNCHANGED


def grade_breaks(
    bs: BreakSet,
    styles: tuple[RegimeStyle, ...],
    tol: float = DEFAULT_SHIFT_TOL,
) -> tuple[BreakShift, ...]:
    """Grade every break from the per-regime fits flanking it."""
    if len(styles) != bs.chosen_m + 1:
        raise StyleError("grade_breaks: one fit per regime required")
    shifts = []
    for pos, b in enumerate(bs.break_indices):
        pre, post = styles[pos], styles[pos + 1]
        per_factor = {}
        for name in ("smb", "hml"):
            before = factor_state(pre.fit.loading(name))
            after = factor_state(post.fit.loading(name))
            per_factor[name] = FactorShift(
                factor=name, before=before, after=after,
                intensity=classify_factor_shift(before, after, tol=tol),
            )
        shifts.append(
            BreakShift(
                break_index=b,
                smb=per_factor["smb"],
                hml=per_factor["hml"],
                intensity=fund_shift_intensity(
                    per_factor["smb"].intensity, per_factor["hml"].intensity
                ),
                style_from=pre.box,
                style_to=post.box,
            )
        )
    return tuple(shifts)


def apply_style_flags(bs: BreakSet, shifts: tuple[BreakShift, ...]) -> BreakSet:
    """Stamp the per-break style-change flags onto the break set."""
    return with_style_flags(bs, tuple(s.is_style_break for s in shifts))


@dataclass(frozen=True)
class TransitionMatrix:
    """9x9 tally of adjacent-regime style pairs, rows = style before."""

    counts: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        if len(self.counts) != 9 or any(len(row) != 9 for row in self.counts):
            raise StyleError("TransitionMatrix: counts must be 9x9")
        if any(c < 0 for row in self.counts for c in row):
            raise StyleError("TransitionMatrix: negative cell")

    @property
    def grand_total(self) -> int:
        return sum(sum(row) for row in self.counts)

    def cell(self, from_box: StyleBox, to_box: StyleBox) -> int:
        return self.counts[from_box.index][to_box.index]

    def row_totals(self) -> tuple[int, ...]:
        return tuple(sum(row) for row in self.counts)

    def col_totals(self) -> tuple[int, ...]:
        return tuple(sum(row[j] for row in self.counts) for j in range(9))


def zero_transitions() -> TransitionMatrix:
    return TransitionMatrix(counts=tuple((0,) * 9 for _ in range(9)))


def accumulate_transitions(per_fund_styles: list[list[StyleBox]]) -> TransitionMatrix:
    """Count every adjacent regime pair, per fund, in chronological order.

    The grand total therefore equals the number of breaks across all
    funds; breaks whose shift graded Unchanged land on the diagonal.
    """
    cells = [[0] * 9 for _ in range(9)]
    for styles in per_fund_styles:
        for s_t, s_next in zip(styles, styles[1:]):
            cells[s_t.index][s_next.index] += 1
    return TransitionMatrix(counts=tuple(tuple(row) for row in cells))


def merge_transitions(a: TransitionMatrix, b: TransitionMatrix) -> TransitionMatrix:
    cells = tuple(
        tuple(x + y for x, y in zip(row_a, row_b))
        for row_a, row_b in zip(a.counts, b.counts)
    )
    return TransitionMatrix(counts=cells)


def render_transition_csv(matrix: TransitionMatrix) -> str:
    """9x9 CSV in canonical label order with a Total row and column."""
    lines = ["style_t," + ",".join(STYLE_BOX_LABELS) + ",Total"]
    row_totals = matrix.row_totals()
    for i, label in enumerate(STYLE_BOX_LABELS):
        cells = ",".join(str(c) for c in matrix.counts[i])
        lines.append(f"{label},{cells},{row_totals[i]}")
    col_totals = matrix.col_totals()
    lines.append(
        "Total," + ",".join(str(c) for c in col_totals) + f",{matrix.grand_total}"
    )
    return "\n".join(lines) + "\n"
