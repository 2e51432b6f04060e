"""OverpassNL-style corpus handling."""
