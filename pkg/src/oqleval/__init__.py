"""
oqleval - OverpassQL evaluation toolkit.

Parsing and analysis of OverpassQL, query similarity metrics, grounded
execution against Overpass API endpoints and a few-shot generation harness.
"""

from oqleval.utils.constants import APP_VERSION

__version__ = APP_VERSION
