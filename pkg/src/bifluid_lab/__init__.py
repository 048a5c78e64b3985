"""bifluid-lab: a numerical laboratory for viscous compressible bi-fluid and
academic multifluid systems on the periodic torus."""

__version__ = "0.1.0"
