"""Unit tests of the ``geocorr`` package and the ``GeoCorr.py`` script

Run from the repository root with ``python -m unittest discover tests``.
"""
