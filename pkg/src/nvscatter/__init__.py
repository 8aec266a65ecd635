"""Fixed-energy 2D Schrodinger scattering, Novikov-Veselov evolution and
soliton-transparency verification at positive energy."""

__version__ = "0.1.0"
