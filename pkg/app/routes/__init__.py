"""
API routes for the Nielsen Orbit Lab.
"""

from .lab import router as lab_router

__all__ = [
    "lab_router",
]
