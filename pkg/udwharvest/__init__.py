"""Leading-order entanglement harvesting by N pointlike Unruh-DeWitt detectors."""
from .configs import GeometryFamily, build, build_dimensionless, chain_rho1_pt
from .elements import ElementParams, PairElements, c_element, p_element
from .errors import HarvestError
from .negativity import DetectorSystem, NegativityResult, assemble_rho1_pt, negativity_leading, system_negativity
from .switching import SwitchingFamily, SwitchingSpec

__version__ = '0.1.0'
