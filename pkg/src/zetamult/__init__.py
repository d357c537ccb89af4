"""Certified optimization bounds on zero multiplicities of Dedekind zeta
functions of abelian number fields, plus an empirical pair-correlation
toolkit for zero datasets."""

__version__ = "0.1.0"
