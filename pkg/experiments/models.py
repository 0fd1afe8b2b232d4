"""
Models for the Experiments application.
"""

from django.db import models
from django.utils import timezone


class ExperimentRun(models.Model):
    """
    One invocation of the experiment driver: what was asked, with which seed, and how it ended.
    The artifacts themselves live on disk under `output_dir`.
    """

    VERIFY_KERNEL = "verify-kernel"
    VERIFY_DTN = "verify-dtn"
    CHECK_HYPOTHESES = "check-hypotheses"
    SOLVE = "solve"
    CONTINUE = "continue"
    ALL = "all"

    VERBS = [
        (VERIFY_KERNEL, "Extension kernel consistency"),
        (VERIFY_DTN, "Finite-difference DtN check"),
        (CHECK_HYPOTHESES, "Hypotheses on the nonlinearity"),
        (SOLVE, "Linking min-max solve"),
        (CONTINUE, "Mass continuation to m = 0"),
        (ALL, "Every verb in order"),
    ]

    PENDING = "pending"
    RUNNING = "running"
    SUCCEEDED = "succeeded"
    FAILED = "failed"

    STATUSES = [(PENDING, "Pending"), (RUNNING, "Running"), (SUCCEEDED, "Succeeded"), (FAILED, "Failed")]

    verb = models.CharField(max_length=20, choices=VERBS)
    config_text = models.TextField()
    # sha256 of the normalized config, embedded in every artifact
    config_hash = models.CharField(max_length=64, db_index=True)
    seed = models.BigIntegerField()
    # command-line overrides (tol, output directory) applied on top of config_text
    overrides = models.JSONField(default=dict, blank=True)

    status = models.CharField(max_length=20, choices=STATUSES, default=PENDING)
    exit_code = models.IntegerField(null=True, blank=True)
    error = models.TextField(blank=True)
    output_dir = models.CharField(max_length=1024)

    # small JSON digest of the artifacts (levels, verdicts, residuals)
    summary = models.JSONField(default=dict, blank=True)

    created_at = models.DateTimeField(auto_now_add=True)
    finished_at = models.DateTimeField(null=True, blank=True)

    class Meta:
        ordering = ["-created_at"]
        indexes = [models.Index(fields=["verb", "status"], name="experiments_verb_status_idx")]

    def __str__(self):
        return f"{self.verb} #{self.pk} ({self.get_status_display()})"

    @property
    def is_finished(self) -> bool:
        return self.status in (self.SUCCEEDED, self.FAILED)

    def mark_running(self):
        self.status = self.RUNNING
        self.save(update_fields=["status"])

    def mark_finished(self, exit_code: int, summary: dict = None, error: str = ""):
        self.status = self.SUCCEEDED if exit_code == 0 else self.FAILED
        self.exit_code = exit_code
        self.error = error
        if summary is not None:
            self.summary = summary
        self.finished_at = timezone.now()
        self.save(update_fields=["status", "exit_code", "error", "summary", "finished_at"])
