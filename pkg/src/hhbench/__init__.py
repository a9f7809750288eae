"""Homomorphism-homogeneity workbench for finite relational structures."""
