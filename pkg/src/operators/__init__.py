"""Finite-difference operators and energies on the pixel grid"""
