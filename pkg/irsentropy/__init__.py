"""Intersectional invariant random subgroups of the free group and of
wreath-like groups, and estimators of their Furstenberg entropy.

"""

__author__ = 'Erik Moqvist'
__version__ = '0.3.0'
