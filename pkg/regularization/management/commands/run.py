from django.core.management.base import BaseCommand, CommandError
from rest_framework.exceptions import ValidationError

from regularization.exceptions import RegularizationError
from regularization.experiments import load_config, run_experiment
from regularization.serializers import flatten_errors


class Command(BaseCommand):
    help = (
        "Run the experiment grid described by a JSON config and write results.csv, "
        "convergence_<run>.svg plots and, for blur2d, PGM images. "
        "Config defaults: eta=1.01, max_iter=100, output_dir=results, write_plots=true; "
        "assumed noise levels default to the actual ones. KRR_OUT overrides output_dir."
    )

    def add_arguments(self, parser):
        parser.add_argument("config", help="Path of the JSON experiment config")
        parser.add_argument(
            "--output-dir",
            help="Directory for the artifacts (overrides KRR_OUT and the config)",
        )

    def handle(self, *args, **options):
        try:
            config = load_config(options["config"])
            written = run_experiment(config, output_dir=options.get("output_dir"))
        except ValidationError as exc:
            raise CommandError("invalid config:\n  " + "\n  ".join(flatten_errors(exc.detail)))
        except RegularizationError as exc:
            raise CommandError(str(exc))

        for path in written:
            self.stdout.write(str(path))
        self.stdout.write(self.style.SUCCESS(f"Wrote {len(written)} files for {config.problem}"))
