"""enclosure2d: a 2D numerical laboratory for the probe and enclosure
methods of inverse obstacle scattering.

Synthesizes Dirichlet/Neumann boundary data for obstacle-perturbed
stationary Schrodinger problems with P1 finite elements, builds complex
geometrical optics probe fields (closed-form and Faddeev/Born), and
reconstructs obstacle geometry from indicator functions.
"""

from .errors import (BornDiverged, ConfigError, DegenerateSlices,
                     EmptyFamily, EmptyIntersection, Enclosure2DError,
                     GeometryClash, InvariantViolation, MeshMismatch,
                     NoBracket, NonPositivePart, ParseError,
                     QuadratureNotConverged, SingularSystem, SourceTooClose,
                     TooFewReliable, ZeroDenominator)
from .geometry import (ConeSectorCap, ConvexPolygon, Direction, Disk,
                       Ellipse, SliceProfile, estimate_p_regularity,
                       l1_l2_ratio, slice_measure, support_function,
                       weighted_l2_lower_bound, width)
from .meshing import (Mesh, OBSTACLE, OUTER, build_ogrid, build_uniform,
                      fill_polygon_hole, read_mesh, rectangle_polygon,
                      write_mesh)
from .fem import (FEField, Impedance, PotentialField, neumann_pairing,
                  reflected_norm_ratios, solve_dirichlet, solve_impedance)
from .cgo import (BoxGrid, CGOField, SpectralParam, box_for_domain,
                  conjugate_cgo, make_exp_cgo, pde_residual, solve_faddeev)
from .indicator import (ImpenetrableSetup, IndicatorSample, IndicatorSeries,
                        PenetrableSetup, absorbing_medium_potentials,
                        alessandrini_oracle, enclosure_impenetrable,
                        enclosure_penetrable, inequality_check_1_20,
                        probe_indicator, representation_check)
from .reconstruct import (HullPolygon, SupportEstimate, assemble_hull,
                          extract_support, hausdorff_to_shape,
                          threshold_characterization)

__version__ = "0.1.0"
