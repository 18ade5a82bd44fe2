"""Numerical thresholds shared across modules.

Most are tolerances chosen so that every catalog model behaves; they are
kept in one place so tests and the CLI report the same values.
"""

# --- stability certificate
STABILITY_RADII = (0.5, 0.9, 0.99, 0.999)
STABILITY_TOL = 1e-9            # relative to the coefficient scale of p
STABILITY_REFINE_SEEDS = 16     # smallest grid samples refined per radius
INTERIOR_MARGIN = 1e-6          # a refined zero counts as interior below 1 - margin
TORUS_CANDIDATE_TOL = 1e-9

# --- slice roots
SLICE_COEFF_TOL = 1e-11         # relative; coefficients below are treated as zero
ROOT_BOUNDARY_TOL = 1e-13       # roots this close to the circle make a slice exceptional

# --- singular scan
SCAN_DEDUPE = 1e-4
SCAN_THIN_FRACTION = 0.25      # cloud spacing as a fraction of the grid step
SCAN_TANGENT_RADIUS = 0.1       # minimum neighbourhood radius for local tangents
SCAN_LINK_RADIUS = 0.4          # minimum linkage radius between cloud points
SCAN_LINE_RATIO = 100.0         # principal/secondary local extent for a curve

# --- sampling and fitting
STRATA_RADII = (1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6)
SAMPLING_BLOCK = 1 << 16
MIN_TAIL_SAMPLES = 30
FIT_MIN_R2 = 0.95
FIT_MIN_DECADES = 2.0
DIVERGENCE_JUMP = 0.25          # relative growth counted as a divergence step
DIVERGENCE_LADDER = 4.0         # resolution ratio between successive truncations
DISAGREEMENT = 0.2
PROXY_MAX_CUTOFF = 1e7          # deepest truncation of the proxy integral ladder

# --- boundary values
C1_THRESHOLD = 1e-6
C1_BAND = 1e-7                  # |mu| this close to the threshold reports both cases
RADIAL_POWERS = tuple(range(2, 9))
RADIAL_OSCILLATION = 1e-4
