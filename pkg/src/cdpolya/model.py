"""Parameters, state, and replacement dynamics of the constant-differential urn.

The urn holds white and blue balls. Drawing a white ball removes ``a`` balls
of each color; drawing a blue ball adds ``a`` of each. The blue-minus-white
difference ``delta`` is therefore constant along every path, and the process
is tenable (never asked to remove balls it does not have) exactly when
``delta >= 1`` and the initial white count is a multiple of ``a``: white
counts then live on the lattice ``{0, a, 2a, ...}``, a white draw can only
happen from ``white >= a``, and blue never drops below ``delta``.
"""

from __future__ import annotations

from dataclasses import dataclass

WHITE = "white"
BLUE = "blue"


class NonPositiveAddition(ValueError):
    """Ball addition amount ``a`` must be a positive integer."""


class NonPositiveDifferential(ValueError):
    """``delta < 1`` lets a path deplete the urn and lock the process."""


class IndivisibleInitialWhite(ValueError):
    """``w0`` not divisible by ``a`` admits a path with 0 < white < a."""


class UntenableDraw(RuntimeError):
    """A draw was applied that the state cannot support (simulator bug)."""


@dataclass(frozen=True)
class ModelParams:
    """One process instance: addition amount, differential index, initial whites.

    The initial blue count is derived, ``b0 = w0 + delta``, so the differential
    ``blue - white = delta`` holds from time zero.
    """

    a: int
    delta: int
    w0: int

    @property
    def b0(self) -> int:
        return self.w0 + self.delta


@dataclass(frozen=True)
class ReplacementMatrix:
    """The fixed ball-replacement rule [[-a, -a], [a, a]].

    Rows are indexed by the drawn color (white, blue), columns by the color
    added. Both row sums have magnitude 2a with opposite signs, so the scheme
    is unbalanced: the total count is a nondegenerate random variable.
    """

    a: int

    @property
    def entries(self) -> tuple[tuple[int, int], tuple[int, int]]:
        return ((-self.a, -self.a), (self.a, self.a))

    def row(self, color: str) -> tuple[int, int]:
        if color == WHITE:
            return (-self.a, -self.a)
        if color == BLUE:
            return (self.a, self.a)
        raise ValueError(f"unknown color {color!r}")


@dataclass(frozen=True)
class UrnState:
    """Ball counts at a point in process time."""

    white: int
    blue: int
    time: float = 0.0


def validate(params: ModelParams) -> None:
    """Check tenability; every downstream module assumes this passed.

    Raises NonPositiveAddition, NonPositiveDifferential, or
    IndivisibleInitialWhite. ``delta`` need not be divisible by ``a``.
    """
    if params.a < 1:
        raise NonPositiveAddition(f"a must be >= 1, got {params.a}")
    if params.delta < 1:
        raise NonPositiveDifferential(
            f"delta must be >= 1 for tenability, got {params.delta}: "
            "a nonpositive differential admits a path that depletes the urn"
        )
    if params.w0 < 0:
        raise IndivisibleInitialWhite(f"w0 must be >= 0, got {params.w0}")
    if params.w0 % params.a != 0:
        raise IndivisibleInitialWhite(
            f"w0={params.w0} is not a multiple of a={params.a}: "
            "a path reaching 0 < white < a could not honor a white draw"
        )


def initial_state(params: ModelParams) -> UrnState:
    return UrnState(white=params.w0, blue=params.b0, time=0.0)


def apply_draw(state: UrnState, color: str, a: int) -> UrnState:
    """Apply the replacement rule for one draw; time advance is the simulator's job."""
    if color == WHITE:
        if state.white < a or state.blue < a:
            raise UntenableDraw(
                f"white draw from (white={state.white}, blue={state.blue}) "
                f"cannot remove {a} of each color"
            )
        return UrnState(state.white - a, state.blue - a, state.time)
    if color == BLUE:
        return UrnState(state.white + a, state.blue + a, state.time)
    raise ValueError(f"unknown color {color!r}")


def total_balls(state: UrnState) -> int:
    """Total count; equals 2*white + delta on every reachable state."""
    return state.white + state.blue
