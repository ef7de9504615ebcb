import csv

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError
from rest_framework.exceptions import ValidationError

from regularization.exceptions import RegularizationError
from regularization.experiments import load_config, run_experiment
from regularization.serializers import flatten_errors
from regularization.solvers import SOLVER_NAMES


class Command(BaseCommand):
    help = (
        "Solve one problem instance with one solver and print the outcome. "
        "Defaults: --problem phillips --n 256 --solver gmres --shift 0 (1 for rr solvers) "
        "--noise 1.0 --seed 1 --eta 1.01 --max-iter 100; --assumed-noise defaults to --noise."
    )

    def add_arguments(self, parser):
        parser.add_argument("--problem", default="phillips", help="phillips, shaw or blur2d")
        parser.add_argument("--n", type=int, default=256, help="Size of the 1D problems")
        parser.add_argument("--N", type=int, default=32, help="Image side for blur2d")
        parser.add_argument("--band", type=int, default=6, help="Blur band width for blur2d")
        parser.add_argument("--sigma", type=float, default=1.5, help="Blur spread for blur2d")
        parser.add_argument("--solver", default="gmres", help=", ".join(SOLVER_NAMES))
        parser.add_argument("--shift", type=int, default=None, help="Range-restriction shift ell")
        parser.add_argument("--noise", type=float, default=1.0, help="Noise level in percent")
        parser.add_argument("--seed", type=int, default=1)
        parser.add_argument("--eta", type=float, default=None, help="Discrepancy safety factor (> 1)")
        parser.add_argument("--max-iter", type=int, default=None)
        parser.add_argument("--assumed-noise", type=float, default=None,
                            help="Noise level (percent) the stopping rule is told about")
        parser.add_argument("--output-dir", default=None,
                            help="Artifact directory (default KRR_OUT or results/solve)")

    def handle(self, *args, **options):
        solver = {"name": options["solver"]}
        if options["shift"] is not None:
            solver["shifts"] = [options["shift"]]
        document = {
            "problem": {
                "name": options["problem"],
                "n": options["n"],
                "N": options["N"],
                "band": options["band"],
                "sigma": options["sigma"],
            },
            "solvers": [solver],
            "noise_levels_percent": [options["noise"]],
            "seeds": [options["seed"]],
            "eta": options["eta"] if options["eta"] is not None else settings.KRR_DEFAULT_ETA,
            "max_iter": options["max_iter"] if options["max_iter"] is not None else settings.KRR_DEFAULT_MAX_ITER,
            "output_dir": "results/solve",
        }
        if options["assumed_noise"] is not None:
            document["assumed_noise_levels_percent"] = [options["assumed_noise"]]

        try:
            config = load_config(document)
            written = run_experiment(config, output_dir=options["output_dir"])
        except ValidationError as exc:
            raise CommandError("invalid arguments:\n  " + "\n  ".join(flatten_errors(exc.detail)))
        except RegularizationError as exc:
            raise CommandError(str(exc))

        with open(written[0], encoding="utf-8", newline="") as handle:
            record = next(csv.DictReader(handle))
        self.stdout.write(
            f"{record['solver']} (shift {record['shift']}) on {record['problem']}: "
            f"{record['stop_reason']} after {record['iterations']} iterations"
        )
        self.stdout.write(f"relative error    {record['relative_error']}")
        self.stdout.write(f"relative residual {record['relative_residual']}")
        self.stdout.write(
            f"minimum error     {record['min_error']} at iteration {record['min_error_iteration']}"
        )
        self.stdout.write(self.style.SUCCESS(f"Artifacts in {written[0].parent}"))
