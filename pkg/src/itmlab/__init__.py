"""Exact-arithmetic engine for interval translation maps.

Subpackages cover the exact kernel, the map type, attractor computation,
first-return maps, coefficient-vector linear algebra, stability
certification, constructive stabilization, the two-parameter family scanner,
square-billiard unfolding, and a CLI + HTTP service.
"""

from .exact import (
    HalfOpenInterval,
    IntervalSet,
    Rational,
    Sign,
    SignedPoint,
    geometric,
    interval,
    minus,
    plus,
    rat,
    rat_str,
)
from .itm import GeometricDiscontinuity, ITMap, InvalidMap, make_map, perturbed
from .attractor import (
    AttractorResult,
    attractor,
    boundary_witness,
    classify_orbit,
    components,
    eventually_periodic,
    maximal_periodic_interval,
)
from .returnmap import ReturnMapData, dynamically_trivial, return_map, rotation_data
from .stability import StabilityReport, check_acc, check_matching, ghost_preimages, ghost_tree, is_stable
from .stabilize import (
    BudgetExhausted,
    CycleDecomposition,
    NotEventuallyPeriodic,
    StabilizationTrace,
    TraceStep,
    UnstableSummary,
    check_correspondence,
    critical_cycles,
    perturb_to_correspondence,
    reduce_unstable,
    stabilize,
    unstable_number,
)

__version__ = "0.1.0"

from .btfamily import (  # noqa: E402  (needs __version__ for cache keys)
    BTParams,
    CellClass,
    OutOfTriangle,
    ScanRequest,
    ScanResult,
    bt_map,
    classify_cell,
    render,
    scan,
)
from .billiards import (  # noqa: E402
    BilliardTable,
    CornerHit,
    Degenerate,
    SlopeDirection,
    SpyMirror,
    first_return_itm,
    make_table,
    trace,
    unfold,
)
