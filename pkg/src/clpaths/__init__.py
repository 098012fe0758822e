"""Path functionals, Schwinger-Dyson solution spaces and complex Langevin
checks for complex densities of rational type."""

__version__ = "0.1.0"

from .density import Density, census  # noqa: E402,F401
