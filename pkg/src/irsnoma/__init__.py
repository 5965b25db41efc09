"""IRS-aided NOMA/OMA outage and ergodic-rate analysis."""
