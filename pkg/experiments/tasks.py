"""
Celery tasks for the Experiments application.
"""

import logging

from celery import shared_task

from core.exceptions import LabError
from experiments.models import ExperimentRun
from experiments.services import ExperimentService

logger = logging.getLogger(__name__)


@shared_task
def execute_experiment_run(run_id):
    """
    Worker Task: runs a stored ExperimentRun.
    The service records status and exit code on the row, so a failed run is not retried.
    """
    run = ExperimentRun.objects.get(pk=run_id)
    if run.is_finished:
        logger.warning("Run %s already finished with exit %s; skipping", run_id, run.exit_code)
        return run.exit_code

    try:
        ExperimentService.execute(run)
    except LabError as exc:
        return exc.exit_code
    return 0
