"""Hardy, Sobolev and Poincare type inequalities on hypersurfaces of R^(n+1).

The package evaluates both sides of these inequalities on triangle meshes
(n = 2) and on exact hypersurfaces of revolution (any n), and probes the
sharpness of their constants through discrete Rayleigh quotients.
"""

from .corpus import make_surface, make_testfn
from .errors import HILError
from .fields import ScalarField, VectorField
from .mesh import SimplicialHypersurface, build_mesh, load_mesh, save_mesh
from .quadrature import QuadratureSpec, integrate
from .revolution import RevolutionHypersurface, make_revolution, solve_catenoid_profile

__version__ = "0.1.0"
