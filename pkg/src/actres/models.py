"""Value types shared by every stage of the scheduling flow.

All times are integer picoseconds. Duty cycle and period of a phase are
integers counted in half main-clock periods.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction


class ParseError(ValueError):
    """A line of an input file does not match its grammar."""

    def __init__(self, message: str, lineno: int | None = None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class Polarity(enum.IntEnum):
    # ordering matters: rising sorts before falling everywhere
    RISING = 0
    FALLING = 1

    @property
    def letter(self) -> str:
        return "r" if self is Polarity.RISING else "f"

    @classmethod
    def from_letter(cls, letter: str) -> Polarity:
        if letter == "r":
            return cls.RISING
        if letter == "f":
            return cls.FALLING
        raise ValueError(f"bad edge letter {letter!r}")


class Kind(enum.Enum):
    MIN_SEP = "sep"
    MIN_HI = "hi"
    MIN_DUR = "dur"

    @property
    def hilike(self) -> bool:
        return self is not Kind.MIN_SEP


class KindSource(enum.Enum):
    EXPLICIT = "explicit"
    INFERRED = "inferred"


class Corner(enum.Enum):
    SLOW = "slow"
    TYPICAL = "typical"
    FAST = "fast"


@dataclass(frozen=True, order=True)
class EdgeRef:
    phase_no: int
    polarity: Polarity

    def __str__(self) -> str:
        return f"{self.phase_no}{self.polarity.letter}"

    @classmethod
    def parse(cls, token: str) -> EdgeRef:
        """Parse an edge token such as ``"3r"`` or ``"12f"``."""
        if len(token) < 2 or not token[:-1].isdigit() or token[-1] not in "rf":
            raise ValueError(f"malformed edge token {token!r}")
        phase_no = int(token[:-1])
        if phase_no < 1:
            raise ValueError(f"phase number must be positive in {token!r}")
        return cls(phase_no, Polarity.from_letter(token[-1]))

    @classmethod
    def rise(cls, phase_no: int) -> EdgeRef:
        return cls(phase_no, Polarity.RISING)

    @classmethod
    def fall(cls, phase_no: int) -> EdgeRef:
        return cls(phase_no, Polarity.FALLING)


@dataclass(frozen=True)
class PhaseDef:
    phase_no: int
    name: str
    duty: int
    period: int
    inv: bool = False

    def __post_init__(self):
        if self.phase_no < 1:
            raise ValueError(f"phase number must be positive, got {self.phase_no}")
        if self.duty < 1:
            raise ValueError(f"phase {self.phase_no}: duty must be >= 1")
        if self.period < 2:
            raise ValueError(f"phase {self.phase_no}: period must be >= 2")
        if self.duty >= self.period:
            raise ValueError(f"phase {self.phase_no}: duty {self.duty} >= period {self.period}")


@dataclass(frozen=True)
class Constraint:
    """``t(dst) - t(src) >= bound_ps``."""

    src: EdgeRef
    dst: EdgeRef
    bound_ps: int
    kind: Kind
    kind_source: KindSource = KindSource.INFERRED

    def __post_init__(self):
        same_phase = self.src.phase_no == self.dst.phase_no
        if self.kind is Kind.MIN_HI:
            if not (same_phase and self.src.polarity is Polarity.RISING
                    and self.dst.polarity is Polarity.FALLING):
                raise ValueError(f"{self.src} -> {self.dst}: min-high must run r -> f on one phase")
        elif same_phase:
            raise ValueError(f"{self.src} -> {self.dst}: {self.kind.value} needs two phases")

    def __str__(self) -> str:
        return f"{self.src} {self.dst} {self.bound_ps}"


@dataclass(frozen=True)
class Config:
    t_clk_ps: int = 16666
    k_fs: Fraction = Fraction(5, 2)
    k_fn: Fraction = Fraction(8, 5)
    default_slack_ps: int = -100
    corner: Corner = Corner.FAST

    def __post_init__(self):
        if self.t_clk_ps <= 0:
            raise ValueError("t_clk_ps must be positive")
        if not (self.k_fs >= self.k_fn >= 1):
            raise ValueError(f"need k_fs >= k_fn >= 1, got k_fs={self.k_fs}, k_fn={self.k_fn}")
        if self.default_slack_ps > 0:
            raise ValueError("default_slack_ps must not be positive")

    @property
    def half_ps(self) -> int:
        if self.t_clk_ps % 2:
            raise ValueError(f"t_clk_ps={self.t_clk_ps} has no integer half period")
        return self.t_clk_ps // 2

    def corner_factor(self, corner: Corner | None = None) -> Fraction:
        """Delay multiplier of ``corner`` relative to the fast corner."""
        corner = corner or self.corner
        return {Corner.SLOW: self.k_fs, Corner.TYPICAL: self.k_fn, Corner.FAST: Fraction(1)}[corner]


@dataclass(frozen=True)
class VariantTiming:
    phase_name: str
    branch: str
    flavor: str  # "clk" or "xclk"
    rise_ps: int
    rise_slew_ps: int
    fall_ps: int
    fall_slew_ps: int

    def __post_init__(self):
        if self.flavor not in ("clk", "xclk"):
            raise ValueError(f"variant flavor must be clk or xclk, got {self.flavor!r}")
        if self.rise_slew_ps < 0 or self.fall_slew_ps < 0:
            raise ValueError(f"{self.name}: negative slew")

    @property
    def name(self) -> str:
        return f"{self.phase_name}_{self.branch}_{self.flavor}"


@dataclass(frozen=True)
class CompositePhase:
    """Worst-case edge envelope of one phase over all its synthesized variants."""

    phase_no: int
    name: str
    r_max: int
    r_min: int
    f_max: int
    f_min: int

    def __post_init__(self):
        if self.r_max < self.r_min or self.f_max < self.f_min:
            raise ValueError(f"composite {self.name}: max below min")


@dataclass(frozen=True)
class Schedule:
    times: dict[EdgeRef, int]
    reference: EdgeRef | None = None

    def __post_init__(self):
        if self.reference is not None and self.reference not in self.times:
            raise ValueError(f"reference {self.reference} has no time")

    def __getitem__(self, edge: EdgeRef) -> int:
        return self.times[edge]

    def edges(self) -> list[EdgeRef]:
        return sorted(self.times)


@dataclass(frozen=True)
class CheckRow:
    constraint: Constraint
    measured_ps: int

    @property
    def margin_ps(self) -> int:
        return self.measured_ps - self.constraint.bound_ps

    @property
    def passed(self) -> bool:
        return self.measured_ps >= self.constraint.bound_ps


@dataclass(frozen=True)
class VerificationReport:
    rows: tuple[CheckRow, ...] = field(default_factory=tuple)

    @property
    def passed(self) -> bool:
        return all(row.passed for row in self.rows)

    @property
    def n_passed(self) -> int:
        return sum(row.passed for row in self.rows)

    def format(self) -> str:
        """Render as ``1f 3r 150 Pass (223)`` lines with aligned columns."""
        if not self.rows:
            return ""
        cells = [(str(r.constraint.src), str(r.constraint.dst), str(r.constraint.bound_ps),
                  "Pass" if r.passed else "Fail", f"({r.measured_ps})") for r in self.rows]
        widths = [max(len(c[i]) for c in cells) for i in range(3)]
        lines = []
        for src, dst, bound, verdict, measured in cells:
            lines.append(f"{src:<{widths[0]}} {dst:<{widths[1]}} {bound:>{widths[2]}} {verdict} {measured}")
        return "\n".join(lines) + "\n"
