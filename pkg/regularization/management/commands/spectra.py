from pathlib import Path

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from regularization.analysis import decay_index, projected_spectrum
from regularization.exceptions import RegularizationError
from regularization.experiments import write_spectra
from regularization.problems import PROBLEMS, add_noise, build_problem

SPECTRUM_SOLVERS = ("gmres", "qmr")


class Command(BaseCommand):
    help = (
        "Compare the singular values of the projected matrices of GMRES (H_m) and "
        "QMR (T_m), and of the R factors of their range-restricted variants. "
        "Defaults: --problem phillips --n 200 --m 30 --noise 1.0 --seed 1 --shifts 0 "
        "--solvers gmres,qmr --output-dir results/spectra."
    )

    def add_arguments(self, parser):
        parser.add_argument("--problem", default="phillips", choices=sorted(PROBLEMS))
        parser.add_argument("--n", type=int, default=200, help="Problem size (image side for blur2d)")
        parser.add_argument("--m", type=int, default=30, help="Basis steps")
        parser.add_argument("--noise", type=float, default=1.0, help="Noise level in percent")
        parser.add_argument("--seed", type=int, default=1)
        parser.add_argument("--shifts", default="0", help="Comma-separated shifts, e.g. 0,1,2")
        parser.add_argument("--solvers", default=",".join(SPECTRUM_SOLVERS),
                            help="Comma-separated subset of gmres,qmr")
        parser.add_argument("--output-dir", default=None,
                            help="Artifact directory (default KRR_OUT or results/spectra)")

    def handle(self, *args, **options):
        try:
            shifts = [int(value) for value in options["shifts"].split(",") if value.strip()]
        except ValueError:
            raise CommandError(f"--shifts must be comma-separated integers, got {options['shifts']!r}")
        solvers = [name.strip() for name in options["solvers"].split(",") if name.strip()]
        for name in solvers:
            if name not in SPECTRUM_SOLVERS:
                raise CommandError(f'unknown solver "{name}"; spectra compares gmres and qmr')

        directory = Path(options["output_dir"] or settings.KRR_OUT or "results/spectra")
        try:
            directory.mkdir(parents=True, exist_ok=True)
            params = {"N": options["n"]} if options["problem"] == "blur2d" else {"n": options["n"]}
            problem = build_problem(options["problem"], **params)
            b = add_noise(problem, options["noise"], options["seed"]).b
            reports = [
                projected_spectrum(name, problem.A, b, options["m"], ell)
                for name in solvers
                for ell in shifts
            ]
            written = write_spectra(reports, directory)
        except (RegularizationError, OSError) as exc:
            raise CommandError(str(exc))

        for report in reports:
            smallest = report.singular_values[-1] if report.singular_values else float("nan")
            flag = " (breakdown)" if report.breakdown else ""
            self.stdout.write(
                f"{report.label}: m={report.m}{flag}, sigma_min={smallest:.3e}, "
                f"drops below 1e-8 at index {decay_index(report.singular_values)}"
            )
        self.stdout.write(self.style.SUCCESS(f"Wrote {', '.join(str(path) for path in written)}"))
