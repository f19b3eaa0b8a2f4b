"""paclab: a desk-scale workbench for computable PAC learning.

Hypothesis classes are finite-window enumerations or pruned binary trees;
learners are proper empirical-risk minimizers with pinned tie-breaking; VC
dimensions come with shattered-set or d-witness certificates; and a toy
register machine supplies a staged halting problem together with the
reduction that turns a proper learner for one concrete class into a decision
procedure for bounded halting.  A FastAPI service wraps the library and the
command-line interface is a thin client of that service.
"""

__version__ = "0.1.0"
