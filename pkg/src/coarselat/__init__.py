"""Finite truncations of coarse structures: relation algebra, lattice operations,
cellular join-decompositions and certificate checking."""

from .relations import (
    Ball,
    Entourage,
    NotAnEquivalence,
    Partition,
    RelationError,
    Window,
    WindowMismatch,
    ball,
    compose,
    equivalence_from_partition,
    intersect,
    inverse,
    merge_classes,
    partition_from_equivalence,
    restrict,
    union,
)
from .structures import (
    CoarseChain,
    CompositionWord,
    IdealSpec,
    NotWithinBudget,
    PermutationSet,
    contains,
    entourage_to_permutations,
    from_graph,
    from_ideal,
    from_metric,
    from_permutations,
    generated_by,
    join_member,
    meet,
    transversal_complement,
)
from .graphs import Graph
from .metrics import MetricWindow
from .certificates import DecompositionCertificate, HypothesisReport, VerificationReport
from .verify import check_hypotheses, oracle_join_covers, verify_certificate

__version__ = "0.1.0"
