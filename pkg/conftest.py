import os

import django

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'jensenlab.settings')
django.setup()
