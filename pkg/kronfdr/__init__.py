"""Support recovery for matrix-variate Gaussian graphical models with FDR control."""
from kronfdr.config import settings

__version__ = settings.APP_VERSION
