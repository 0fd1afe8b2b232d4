"""
Prints the constants a configuration implies, without running any solve.
"""

from django.core.management.base import BaseCommand, CommandError

from core.exceptions import LabError
from experiments.serializers import load_config
from variational.continuation import bounds
from variational.linking import build_geometry, coercivity_constant


class Command(BaseCommand):
    help = "Describes the derived constants of an experiment configuration"

    def add_arguments(self, parser):
        parser.add_argument("--config", required=True, help="INI experiment configuration")

    def handle(self, *args, **options):
        try:
            config = load_config(options["config"])
            params = config.params
            nl = config.build_nonlinearity()
            rows = [
                ("omega", params.omega),
                ("kappa_s", params.kappa_s),
                ("m0", params.mass_threshold),
            ]
            if params.mass > 0:
                geometry = build_geometry(params, nl)
                rows += [("C_m", coercivity_constant(params)), ("r", geometry.r), ("rho", geometry.rho)]
            level_bounds = bounds(params, nl)
            rows += [("K1", level_bounds.K1), ("K2", level_bounds.K2)]
        except LabError as exc:
            raise CommandError(str(exc), returncode=exc.exit_code) from exc

        self.stdout.write(f" {nl.label} on N={params.dim}, T={params.period:g}, s={params.order:g}, m={params.mass:g}")
        for name, value in rows:
            self.stdout.write(f"   {name:<8} = {value:.10g}")
