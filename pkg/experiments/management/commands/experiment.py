"""
Runs one experiment verb from a configuration file.
"""

from django.core.management.base import BaseCommand, CommandError

from core.exceptions import LabError
from experiments.models import ExperimentRun
from experiments.serializers import load_config
from experiments.services import ExperimentService
from experiments.tasks import execute_experiment_run


class Command(BaseCommand):
    help = "Runs verify-kernel | verify-dtn | check-hypotheses | solve | continue | all"

    def add_arguments(self, parser):
        parser.add_argument("verb", choices=[verb for verb, _ in ExperimentRun.VERBS])
        parser.add_argument("--config", required=True, help="INI experiment configuration")
        parser.add_argument("--out", default=None, help="Output directory (overrides [run] output_dir)")
        parser.add_argument("--seed", type=int, default=None, help="Seed for randomized checks")
        parser.add_argument("--tol", type=float, default=None, help="Cerami tolerance override")
        parser.add_argument("--background", action="store_true", help="Dispatch the run to a Celery worker")

    def handle(self, *args, **options):
        verb = options["verb"]
        try:
            config = load_config(options["config"]).with_overrides(
                seed=options["seed"], tol=options["tol"], output_dir=options["out"]
            )
            overrides = {"tol": options["tol"]} if options["tol"] is not None else {}
            run = ExperimentService.create_run(config, verb, overrides=overrides)
        except LabError as exc:
            raise CommandError(str(exc), returncode=exc.exit_code) from exc

        self.stdout.write(f" Run #{run.pk}: {verb} seed={run.seed} config={run.config_hash[:12]} -> {run.output_dir}")

        if options["background"]:
            execute_experiment_run.delay(run.pk)
            self.stdout.write(self.style.SUCCESS(f" Dispatched run #{run.pk} to the worker."))
            return

        try:
            ExperimentService.execute(run)
        except LabError as exc:
            raise CommandError(f"{type(exc).__name__}: {exc}", returncode=exc.exit_code) from exc

        self.stdout.write(self.style.SUCCESS(f" Done! Artifacts in {run.output_dir}"))
