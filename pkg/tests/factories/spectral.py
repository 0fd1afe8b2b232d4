"""
Factories for the frozen problem dataclasses.
"""

import math

import factory

from extension.cylinder import ModeProblem
from spectral.params import KAPPA_EXPLICIT, ProblemParams


class ProblemParamsFactory(factory.Factory):
    """
    Small 1-D problem: ω = 1, κ_{1/2} = 1, so most quantities have closed forms.
    """

    class Meta:
        model = ProblemParams

    dim = 1
    period = 2.0 * math.pi
    order = 0.5
    mass = 1.0
    cutoff = 8
    grid = 32
    kappa_mode = KAPPA_EXPLICIT

    class Params:
        # 2-D torus with the same spacing
        planar = factory.Trait(dim=2, cutoff=4, grid=16)
        # discretization of the acceptance runs
        acceptance = factory.Trait(cutoff=32, grid=128)
        massless = factory.Trait(mass=0.0)


class ModeProblemFactory(factory.Factory):
    class Meta:
        model = ModeProblem

    lam = 1.0
    order = 0.5
    nodes = 256
    grading = 2.0
