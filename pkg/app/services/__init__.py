"""
Services for the Nielsen Orbit Lab.

Submodules are imported explicitly (``from app.services import psl2``);
the lab and experiment services expose global instances.
"""
