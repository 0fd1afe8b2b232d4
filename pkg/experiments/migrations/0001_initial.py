# Generated by Django 5.0.2 on 2026-10-18 09:12

from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = []

    operations = [
        migrations.CreateModel(
            name='ExperimentRun',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('verb', models.CharField(choices=[('verify-kernel', 'Extension kernel consistency'), ('verify-dtn', 'Finite-difference DtN check'), ('check-hypotheses', 'Hypotheses on the nonlinearity'), ('solve', 'Linking min-max solve'), ('continue', 'Mass continuation to m = 0'), ('all', 'Every verb in order')], max_length=20)),
                ('config_text', models.TextField()),
                ('config_hash', models.CharField(db_index=True, max_length=64)),
                ('seed', models.BigIntegerField()),
                ('overrides', models.JSONField(blank=True, default=dict)),
                ('status', models.CharField(choices=[('pending', 'Pending'), ('running', 'Running'), ('succeeded', 'Succeeded'), ('failed', 'Failed')], default='pending', max_length=20)),
                ('exit_code', models.IntegerField(blank=True, null=True)),
                ('error', models.TextField(blank=True)),
                ('output_dir', models.CharField(max_length=1024)),
                ('summary', models.JSONField(blank=True, default=dict)),
                ('created_at', models.DateTimeField(auto_now_add=True)),
                ('finished_at', models.DateTimeField(blank=True, null=True)),
            ],
            options={
                'ordering': ['-created_at'],
                'indexes': [models.Index(fields=['verb', 'status'], name='experiments_verb_status_idx')],
            },
        ),
    ]
