from fractions import Fraction

from hypothesis import strategies as st

from stochorder.measures import FiniteMeasure


@st.composite
def exact_measures(draw, max_atoms=5, lo=-6, hi=12):
    """Exact measures with integer support in [lo, hi] and rational weights."""
    points = draw(
        st.lists(st.integers(lo, hi), min_size=1, max_size=max_atoms, unique=True)
    )
    raw = draw(st.lists(st.integers(1, 9), min_size=len(points), max_size=len(points)))
    total = sum(raw)
    return FiniteMeasure.from_atoms(
        {Fraction(x): Fraction(w, total) for x, w in zip(points, raw)}
    )


@st.composite
def float_measures(draw, max_atoms=5):
    points = draw(
        st.lists(
            st.floats(-20, 20, allow_nan=False).map(lambda v: round(v, 3)),
            min_size=1, max_size=max_atoms, unique=True,
        )
    )
    raw = draw(
        st.lists(st.floats(0.05, 1.0), min_size=len(points), max_size=len(points))
    )
    total = sum(raw)
    return FiniteMeasure.from_atoms([(x, w / total) for x, w in zip(points, raw)])


# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[key])
