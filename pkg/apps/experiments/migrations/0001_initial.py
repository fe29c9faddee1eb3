# Generated by Django 4.2.16 on 2026-10-18 09:12

from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = []

    operations = [
        migrations.CreateModel(
            name="ExperimentRun",
            fields=[
                (
                    "id",
                    models.BigAutoField(
                        auto_created=True,
                        primary_key=True,
                        serialize=False,
                        verbose_name="ID",
                    ),
                ),
                (
                    "created_at",
                    models.DateTimeField(
                        auto_now_add=True,
                        db_index=True,
                        help_text="Creation timestamp",
                        verbose_name="created at",
                    ),
                ),
                (
                    "updated_at",
                    models.DateTimeField(
                        auto_now=True,
                        help_text="Last modification timestamp",
                        verbose_name="updated at",
                    ),
                ),
                (
                    "kind",
                    models.CharField(
                        choices=[
                            ("assemble", "Assemble"),
                            ("thresholds", "Thresholds"),
                            ("fibering-report", "Fibering report"),
                            ("solve-positive", "Solve positive"),
                            ("solve-signchanging", "Solve sign-changing"),
                            ("bubble-asymptotics", "Bubble asymptotics"),
                            ("fountain-levels", "Fountain levels"),
                            ("multi-solve", "Multi-solve"),
                        ],
                        db_index=True,
                        max_length=32,
                        verbose_name="kind",
                    ),
                ),
                (
                    "status",
                    models.CharField(
                        choices=[("succeeded", "Succeeded"), ("failed", "Failed")],
                        max_length=16,
                        verbose_name="status",
                    ),
                ),
                (
                    "exit_code",
                    models.PositiveSmallIntegerField(default=0, verbose_name="exit code"),
                ),
                (
                    "config_hash",
                    models.CharField(
                        blank=True,
                        db_index=True,
                        help_text="SHA-256 of the canonical configuration; empty when validation failed",
                        max_length=64,
                        verbose_name="config hash",
                    ),
                ),
                ("seed", models.BigIntegerField(default=0, verbose_name="seed")),
                ("output_dir", models.CharField(max_length=500, verbose_name="output directory")),
                (
                    "manifest",
                    models.JSONField(blank=True, default=dict, verbose_name="manifest"),
                ),
                (
                    "error",
                    models.JSONField(blank=True, null=True, verbose_name="error"),
                ),
                ("duration", models.FloatField(default=0.0, verbose_name="duration (s)")),
            ],
            options={
                "verbose_name": "Experiment run",
                "verbose_name_plural": "Experiment runs",
                "db_table": "experiment_runs",
                "ordering": ["-created_at"],
                "indexes": [
                    models.Index(fields=["kind", "status"], name="experiment_kind_status_idx"),
                ],
            },
        ),
    ]
