"""
Service layer for experiment runs.
Each verb runs its checks, writes its artifacts and returns a short summary; any violated
property or failed solve surfaces as a LabError carrying the exit code.
"""

import logging
import math
from pathlib import Path

import numpy as np
from django.conf import settings
from django.db import transaction

from core.context import get_current_rng, reset_current_rng, set_current_rng
from core.exceptions import ConfigError, LabError, PropertyViolation, StagnationWithoutConvergence
from experiments.artifacts import ArtifactWriter, to_jsonable
from experiments.models import ExperimentRun
from experiments.serializers import RunConfig, parse_config
from extension.cylinder import (
    CONVERGENCE_HEADER,
    ModeProblem,
    convergence_study,
    discrete_energy,
    dtn_symbol,
    solve_mode,
)
from extension.profile import exponential_trial, make_profile, perturbed_profile, profile_table
from extension.richardson import validate_probes
from extension.services import conormal_symbol, extend, strip_bound_check, trace_inequality_check
from spectral.params import kappa_constant
from spectral.services import hs_norm, l2_norm, pairing, random_field
from variational.continuation import bounds, run_continuation
from variational.functional import excess_integral, functional_gradient, functional_value
from variational.hypotheses import FAIL, check_hypotheses
from variational.linking import (
    build_geometry,
    coercivity_check,
    energy_ratio_check,
    geometry_samples,
    minmax_search,
)
from variational.refine import weak_solution_check

logger = logging.getLogger(__name__)

REFERENCE_ORDERS = (0.25, 0.5, 0.75)
REFERENCE_RATES = (1.0, 2.0, 5.0)
STUDY_NODES = (64, 128, 256, 512)
STUDY_NODES_AT = 256

KAPPA_TOL = 1e-6
CLOSED_FORM_TOL = 1e-10
FD_TOL = 2e-2
ENERGY_TOL = 1e-10
TRACE_FIELDS = 200
STRIP_FIELDS = 50
PERTURBATION = 0.1
PERTURBED_GAP = 1e-4
WEAK_TOL = 1e-4
TRIVIAL_NORM = 1e-3


class ExperimentService:
    """
    Runs the verbs of one experiment configuration.
    """

    VERBS = (
        ExperimentRun.VERIFY_KERNEL,
        ExperimentRun.VERIFY_DTN,
        ExperimentRun.CHECK_HYPOTHESES,
        ExperimentRun.SOLVE,
        ExperimentRun.CONTINUE,
    )

    def __init__(self, config: RunConfig, output_dir):
        self.config = config
        self.writer = ArtifactWriter(output_dir, config.config_hash, config.seed)
        self.handlers = {
            ExperimentRun.VERIFY_KERNEL: self.verify_kernel,
            ExperimentRun.VERIFY_DTN: self.verify_dtn,
            ExperimentRun.CHECK_HYPOTHESES: self.check_hypotheses,
            ExperimentRun.SOLVE: self.solve,
            ExperimentRun.CONTINUE: self.continue_run,
        }

    # --- lifecycle ---

    @classmethod
    def create_run(cls, config: RunConfig, verb: str, overrides: dict = None) -> ExperimentRun:
        if verb not in dict(ExperimentRun.VERBS):
            raise ConfigError("unknown verb", field="verb")
        with transaction.atomic():
            run = ExperimentRun.objects.create(
                verb=verb,
                config_text=config.text,
                config_hash=config.config_hash,
                seed=config.seed,
                overrides=overrides or {},
                output_dir=config.run.get("output_dir", ""),
            )
            if not run.output_dir:
                run.output_dir = str(Path(settings.LAB_OUTPUT_ROOT) / f"run-{run.pk}")
                run.save(update_fields=["output_dir"])
        return run

    @classmethod
    def config_for(cls, run: ExperimentRun) -> RunConfig:
        overrides = run.overrides or {}
        return parse_config(run.config_text).with_overrides(
            seed=run.seed, tol=overrides.get("tol"), output_dir=run.output_dir
        )

    @classmethod
    def execute(cls, run: ExperimentRun) -> dict:
        """
        Runs the verb of `run` with the run's seed installed, recording status and exit code.
        """
        config = cls.config_for(run)
        service = cls(config, run.output_dir)
        set_current_rng(run.seed)
        run.mark_running()
        logger.info("Run %s: %s seed=%s hash=%s", run.pk, run.verb, run.seed, run.config_hash[:12])
        try:
            summary = service.run_verb(run.verb)
        except LabError as exc:
            logger.error("Run %s failed with exit %s: %s", run.pk, exc.exit_code, exc)
            run.mark_finished(exc.exit_code, error=str(exc))
            raise
        except Exception as exc:
            logger.exception("Run %s crashed", run.pk)
            run.mark_finished(LabError.exit_code, error=repr(exc))
            raise
        finally:
            reset_current_rng()
        run.mark_finished(0, summary=to_jsonable(summary))
        return summary

    def run_verb(self, verb: str) -> dict:
        if verb == ExperimentRun.ALL:
            summary = {}
            for name in self.VERBS:
                summary[name] = self.run_verb(name)
            return summary
        summary = self.handlers[verb]()
        self.writer.write_json(f"{verb}.json", summary)
        return summary

    # --- verbs ---

    def verify_kernel(self) -> dict:
        """
        κ_s three ways, the closed form at s = 1/2, the trace inequality and the strip bound.
        """
        params = self.config.params
        probes = validate_probes(settings.LAB_DEFAULTS["probes"])
        orders = sorted({*REFERENCE_ORDERS, params.order})

        rows = []
        for order in orders:
            profile = make_profile(order)
            gamma_form = kappa_constant(order)
            energy = profile.energy()
            dtn, _ = conormal_symbol(profile, 1.0, probes)
            spread = max(abs(energy - gamma_form), abs(dtn - gamma_form)) / gamma_form
            rows.append([order, gamma_form, energy, dtn, spread])
        self.writer.write_csv("kappa.csv", ["s", "gamma_formula", "energy", "dtn", "relative_spread"], rows)

        heights = np.linspace(0.0, 20.0, 2001)
        closed_form_error = float(np.max(np.abs(make_profile(0.5).theta(heights) - np.exp(-heights))))

        profile = make_profile(params.order)
        self.writer.write_csv(
            "profile.csv", ["xi", "theta", "theta_prime"], profile_table(profile, np.linspace(0.0, 10.0, 201))
        )

        trace = self._trace_checks(params, profile)
        strip = self._strip_checks(params)

        worst_spread = max(row[-1] for row in rows)
        summary = {
            "kappa": [dict(zip(("s", "gamma", "energy", "dtn", "spread"), row)) for row in rows],
            "closed_form_error": closed_form_error,
            "trace": trace,
            "strip": strip,
        }
        if worst_spread > KAPPA_TOL:
            raise PropertyViolation("kappa_s estimates disagree", spread=worst_spread)
        if closed_form_error > CLOSED_FORM_TOL:
            raise PropertyViolation("s = 1/2 profile differs from exp(-xi)", error=closed_form_error)
        if not (trace["holds"] and trace["pure_equal"] and trace["perturbed_gap"] > PERTURBED_GAP):
            raise PropertyViolation("trace inequality check failed", **trace)
        if not strip["holds"]:
            raise PropertyViolation("strip bound violated", worst_slack=strip["worst_slack"])
        return summary

    def _trace_checks(self, params, profile) -> dict:
        rng = get_current_rng()
        competitors = (None, perturbed_profile(profile, PERTURBATION), exponential_trial(params.order))
        holds = True
        pure_equal = True
        perturbed_gap = math.inf
        for _ in range(TRACE_FIELDS):
            u = random_field(params, rng, real=True)
            pure, perturbed, trial = (trace_inequality_check(u, competitor) for competitor in competitors)
            holds = holds and pure.holds and perturbed.holds and trial.holds
            pure_equal = pure_equal and pure.is_extension
            perturbed_gap = min(perturbed_gap, perturbed.relative_gap)
        return {"fields": TRACE_FIELDS, "holds": holds, "pure_equal": pure_equal, "perturbed_gap": perturbed_gap}

    def _strip_checks(self, params) -> dict:
        rng = get_current_rng()
        holds = True
        worst_slack = math.inf
        for _ in range(STRIP_FIELDS):
            v = extend(random_field(params, rng, real=True))
            for delta in self.config.deltas:
                report = strip_bound_check(v, delta)
                holds = holds and report.holds
                worst_slack = min(worst_slack, report.slack)
        return {"fields": STRIP_FIELDS, "deltas": list(self.config.deltas), "holds": holds, "worst_slack": worst_slack}

    def verify_dtn(self) -> dict:
        """
        Finite-difference recovery of κ_s λ^{2s} per mode, with a refinement study.
        """
        probes = validate_probes(settings.LAB_DEFAULTS["probes"])
        orders = sorted({*REFERENCE_ORDERS, self.config.params.order})
        rows = []
        study = []
        worst = 0.0
        monotone = True
        energy_gap = math.inf
        for order in orders:
            profile = make_profile(order)
            for lam in REFERENCE_RATES:
                mp = ModeProblem(lam=lam, order=order, nodes=STUDY_NODES_AT)
                values = solve_mode(mp)
                symbol = dtn_symbol(mp, values)
                spectral_symbol, _ = conormal_symbol(profile, lam, probes)
                error = abs(symbol - mp.expected_symbol) / mp.expected_symbol
                agreement = abs(symbol - spectral_symbol) / spectral_symbol
                energy = discrete_energy(mp, values)
                energy_gap = min(energy_gap, (energy - mp.expected_symbol) / mp.expected_symbol)
                worst = max(worst, error, agreement)
                rows.append([order, lam, symbol, mp.expected_symbol, error, agreement, energy])

                table = convergence_study(mp, STUDY_NODES)
                errors = [row.error for row in table]
                monotone = monotone and all(b <= a for a, b in zip(errors, errors[1:]))
                study.extend(row.as_row() for row in table)

        self.writer.write_csv(
            "dtn.csv", ["s", "lambda", "symbol", "expected", "error", "agreement", "discrete_energy"], rows
        )
        self.writer.write_csv("convergence.csv", CONVERGENCE_HEADER, study)
        summary = {"worst_error": worst, "monotone": monotone, "nodes": STUDY_NODES_AT, "energy_gap": energy_gap}
        if energy_gap < -ENERGY_TOL:
            raise PropertyViolation("discrete energy fell below κ_s λ^{2s}", gap=energy_gap)
        if worst > FD_TOL:
            raise PropertyViolation("finite-difference symbol off by more than 2%", error=worst)
        if not monotone:
            raise PropertyViolation("symbol error does not decay under refinement")
        return summary

    def check_hypotheses(self) -> dict:
        nl = self.config.build_nonlinearity()
        report = check_hypotheses(nl, self.config.params, self.config.sampler())
        self.writer.write_json("hypotheses_report.json", report)
        coercivity = coercivity_check(self.config.params, samples=self.config.sampler().samples)
        self.writer.write_json("coercivity.json", coercivity)
        summary = {
            "label": nl.label,
            "verdicts": {item.name: item.verdict for item in report.verdicts},
            "ar": report.ar.verdict,
            "passed": report.passed,
            "C_m": coercivity.closed,
            "C_m_sampled": coercivity.sampled,
        }
        if not report.passed:
            failed = [item.name for item in report.verdicts if item.verdict == FAIL]
            raise PropertyViolation("nonlinearity fails its hypotheses", label=nl.label, failed=failed)
        if not coercivity.holds:
            raise PropertyViolation("sampled coercivity disagrees with C_m", **coercivity.__dict__)
        return summary

    def solve(self) -> dict:
        """
        Linking geometry, sampled geometry checks, min-max search and the DtN cross-check.
        """
        params = self.config.params
        nl = self.config.build_nonlinearity()
        options = self.config.solver_options()

        geometry = build_geometry(params, nl)
        count = self.config.sampler().samples
        samples = geometry_samples(geometry, nl, count=count)
        coercivity = coercivity_check(params, samples=count)
        ratios = energy_ratio_check(params, geometry.ratios)
        self.writer.write_json(
            "geometry.json",
            {"geometry": geometry.as_dict(), "samples": samples, "coercivity": coercivity, "energy_ratio": ratios},
        )
        if not coercivity.holds:
            raise PropertyViolation("sampled coercivity disagrees with C_m", **coercivity.__dict__)
        if not samples.holds:
            if geometry.bounded or not (samples.y_ok and samples.sphere_ok):
                raise PropertyViolation("sampled linking geometry is inconsistent", **samples.__dict__)
            # without B_A the rim carries no sign guarantee; the search flags the degenerate case
            logger.warning("Rim levels reach %.6g for %s", samples.rim_max, nl.label)

        result = minmax_search(geometry, nl, options)
        self.writer.write_csv("path.csv", ["sweep", "level"], result.path_history)
        self.writer.write_csv("trace.csv", ["iteration", "level", "residual"], result.trace)
        if not result.converged:
            raise StagnationWithoutConvergence(alpha=result.alpha, residual=result.residual)

        u = result.candidate
        self.writer.write_field("solution.json", u)
        weak = weak_solution_check(u, nl, tol=WEAK_TOL, probe_tol=options.probe_tol)
        identity = pairing(functional_gradient(u, nl), u)
        excess = params.kappa * excess_integral(u, nl)
        summary = {
            "alpha": result.alpha,
            "residual": result.residual,
            "b_m": geometry.b_m,
            "norm": hs_norm(u),
            "iterations": result.iterations,
            "weak_relative_error": weak.relative_error,
            "critical_pairing": identity,
            "excess_gap": abs(2.0 * functional_value(u, nl) - identity - excess),
        }
        if result.alpha < geometry.b_m - options.level_tol:
            raise PropertyViolation("level below the sphere bound", alpha=result.alpha, b_m=geometry.b_m)
        if summary["norm"] <= TRIVIAL_NORM:
            raise PropertyViolation("solution is numerically trivial", norm=summary["norm"])
        if not weak.holds:
            raise PropertyViolation("DtN cross-check failed", relative_error=weak.relative_error)
        return summary

    def continue_run(self) -> dict:
        params = self.config.params
        nl = self.config.build_nonlinearity()
        options = self.config.solver_options()
        level_bounds = bounds(params, nl)
        self.writer.write_json("bounds.json", level_bounds)

        report = run_continuation(
            params, nl, self.config.schedule, options=options, warm_start=self.config.warm_start
        )
        rows = []
        for step in report.steps:
            u = step.result.candidate
            rows.append([step.mass, step.alpha, step.result.residual, l2_norm(u), step.lp_norm])
        limit_level = functional_value(report.limit, nl)
        rows.append([0.0, limit_level, report.limit_residual, report.limit_l2, report.limit_lp])
        self.writer.write_csv("continuation.csv", ["m", "alpha_m", "residual", "l2_norm", "lp_norm"], rows)
        self.writer.write_field("limit.json", report.limit)

        steps = [
            {
                "m": step.mass,
                "alpha": step.alpha,
                "warm": step.warm,
                "norms": step.norms,
                "lp_norm": step.lp_norm,
                "above_floor": step.above_floor,
            }
            for step in report.steps
        ]
        strip = [
            strip_bound_check(extend(step.result.candidate), delta)
            for step in report.steps
            for delta in self.config.deltas
        ]
        summary = {
            "bounds": level_bounds,
            "steps": steps,
            "limit_residual": report.limit_residual,
            "limit_lp": report.limit_lp,
            "floor": report.floor,
            "strip_holds": all(item.holds for item in strip),
        }
        if not summary["strip_holds"]:
            raise PropertyViolation("strip bound violated along the run")
        return summary
