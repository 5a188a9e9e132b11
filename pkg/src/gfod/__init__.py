"""Generalized frame operator distance: optimal spectra, synthesis and verification."""
