"""Fuchsian and Hitchin-grafted representations of a genus-2 surface group:
closed-geodesic censuses, Finsler length spectra, entropy, intersection
forms and pressure lengths along grafting rays."""

__version__ = "0.1.0"
