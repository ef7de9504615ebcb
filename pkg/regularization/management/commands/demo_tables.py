from pathlib import Path

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError
from rest_framework.exceptions import ValidationError

from regularization.exceptions import RegularizationError
from regularization.experiments import DEMO_NAMES, demo_config, load_config, run_experiment
from regularization.serializers import flatten_errors


class Command(BaseCommand):
    help = (
        "Run the builtin comparison grids (table1, table2, table3, underestimate) "
        "at desk scale, each into its own subdirectory. "
        "Defaults: --table all --n 512 --N 32 --seeds 5 --output-dir results."
    )

    def add_arguments(self, parser):
        parser.add_argument("--table", default="all", choices=DEMO_NAMES + ("all",))
        parser.add_argument("--output-dir", default=None,
                            help="Parent directory of the per-table outputs (default KRR_OUT or results)")
        parser.add_argument("--n", type=int, default=512, help="Size of the 1D problems")
        parser.add_argument("--N", type=int, default=32, help="Image side of the deblurring table")
        parser.add_argument("--seeds", type=int, default=5, help="Number of noise seeds (1..seeds)")

    def handle(self, *args, **options):
        if options["seeds"] < 1:
            raise CommandError("--seeds must be at least 1")
        names = DEMO_NAMES if options["table"] == "all" else (options["table"],)
        parent = Path(options["output_dir"] or settings.KRR_OUT or "results")

        for name in names:
            document = demo_config(name, n=options["n"], N=options["N"], seeds=options["seeds"])
            try:
                config = load_config(document)
                written = run_experiment(config, output_dir=parent / name)
            except ValidationError as exc:
                raise CommandError("invalid demo config:\n  " + "\n  ".join(flatten_errors(exc.detail)))
            except RegularizationError as exc:
                raise CommandError(str(exc))
            self.stdout.write(self.style.SUCCESS(f"{name}: wrote {len(written)} files to {parent / name}"))
