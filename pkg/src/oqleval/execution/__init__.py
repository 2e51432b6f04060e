"""Macro expansion and query execution against Overpass endpoints."""
