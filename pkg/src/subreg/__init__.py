"""Exact cone calculus and constraint-qualification checks for P(x) in Lambda."""

from .cones import (ComplFactor, ConeUnion, InfeasiblePoint, Orthant, PolyUnion, Polyhedron, StructuredSet,
                    ZeroSet, directional_normal_cone, limiting_normal_cone, regular_normal_cone, tangent_cone)
from .cq import (FAILS, HOLDS, UNKNOWN, Report, Verdict, Witness, check_cs_directional, check_dir_pseudo,
                 check_dir_quasi, check_foscms, check_nnamcq, check_soscms, report_chain, reverify, reverify_cs)
from .ratgeom import HCone, VCone
from .system import (CSInstance, KKTInstance, Oracle, ProblemInstance, QuadMap, cs_to_general, index_sets,
                     jacobian, kkt_to_cs, linearized_cone, second_derivative)
from .verify import SamplingConfig, distance_to_solutions, empirical_modulus, residual, sequence_falsifier

__version__ = "0.1.0"
