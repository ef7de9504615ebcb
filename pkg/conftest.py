"""Pytest wiring: load the Django settings that ``manage.py test`` would use."""
import os

import django

os.environ.setdefault("DJANGO_SETTINGS_MODULE", "krylovlab.settings")
django.setup()
