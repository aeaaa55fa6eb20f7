"""Collision-free control from scaling-function barriers.

Subpackages:
  geometry     body-frame shapes, rigid frames, world jets, ellipsoid fits
  sensitivity  minimum-scaling solvers and derivatives of the optimum
  safety       barrier rows, smooth aggregation, circulation, QP filter
  qpcore       dense convex QP solver with certification
  simkit       plants, controllers, scenarios, closed-loop rollouts
  cli          command-line entry point and report suites
"""

__version__ = "0.1.0"
