"""Topological simplification of scalar functions on combinatorial surfaces."""

from .cell_complex import (CellComplex, DualComplex, SurfaceReport,
                           cap_boundary, dual, from_pixel_grid,
                           from_triangle_mesh, pixel_cells, validate_surface)
from .errors import *  # noqa: F401,F403
from .morse import (GradientField, TotalOrder, VPath, build_total_order,
                    cancel_pair, check_consistency, critical_cells,
                    extend_from_top_cells, extend_from_vertices,
                    induced_hasse_diagram, is_gradient, linear_extension,
                    trace_vpaths_from)
from .persistence import (PersistenceDiagram, PersistenceRecord, RecordSet,
                          SpanningForestResult, all_persistence_pairs,
                          bottleneck_distance, diagram, kruskal_persistence)
from .simplify import (SimplificationResult, construct_f_max,
                       construct_f_min, extract_gradient_field,
                       plateau_sequence, simplify, smooth_within_polytope,
                       symmetrize)

__version__ = "0.1.0"
