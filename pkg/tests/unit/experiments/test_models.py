"""
Unit tests for the ExperimentRun model.
"""

from experiments.models import ExperimentRun
from tests.factories.experiments import ExperimentRunFactory


class TestExperimentRun:
    def test_new_run_is_pending(self):
        run = ExperimentRunFactory()

        assert run.status == ExperimentRun.PENDING
        assert run.exit_code is None
        assert not run.is_finished

    def test_mark_running(self):
        run = ExperimentRunFactory()

        run.mark_running()
        run.refresh_from_db()

        assert run.status == ExperimentRun.RUNNING

    def test_mark_finished_success(self):
        run = ExperimentRunFactory()

        run.mark_finished(0, summary={"alpha": 0.5})
        run.refresh_from_db()

        assert run.status == ExperimentRun.SUCCEEDED
        assert run.exit_code == 0
        assert run.summary == {"alpha": 0.5}
        assert run.finished_at is not None
        assert run.is_finished

    def test_mark_finished_failure_keeps_summary(self):
        run = ExperimentRunFactory(summary={"kept": True})

        run.mark_finished(3, error="strip bound violated")
        run.refresh_from_db()

        assert run.status == ExperimentRun.FAILED
        assert run.exit_code == 3
        assert run.error == "strip bound violated"
        assert run.summary == {"kept": True}

    def test_str(self):
        run = ExperimentRunFactory(verb=ExperimentRun.SOLVE, succeeded=True)

        assert str(run) == f"solve #{run.pk} (Succeeded)"
