"""Source package for scompress."""
