"""
Human error probability from an error tally and eight shaping factors
=====================================================================

Walks the full quantification chain by hand: count-based nominal
probability, multiplier lookup by level label, the product of all
eight multipliers, and the composite adjustment that keeps the
result inside [0, 1].
"""

from hra_forge import (
    FAILURE_CERTAIN,
    ErrorTally,
    Mode,
    PsfId,
    bundled_multiplier_tables,
    composite_hep,
    nominal_hep,
    resolve_levels,
    total_psf_impact,
)

# A task was observed 1000 times and failed 10 times.
tally = ErrorTally(occurred=10, potential=1000)
nominal = nominal_hep(tally)
print(f"nominal HEP          = {nominal.value}")

# Multiplier tables map level labels to multipliers.  The package
# ships one for available time; the remaining factors accept numeric
# multipliers directly (or your own table file).
tables = bundled_multiplier_tables()
for row in tables[PsfId.AvailableTime].rows:
    print(f"  {row.label:<26s} action={row.action}  diagnosis={row.diagnosis}")

# Generous time, everything else at nominal (multiplier 1).
assignments = {PsfId.AvailableTime: "Expansive time"}
vector = resolve_levels(tables, assignments, Mode.Diagnosis)
print(f"resolved multipliers = {vector}")

impact = total_psf_impact(vector)
print(f"total impact         = {impact}")

# The composite adjustment is a plain product for impacts <= 1 and a
# saturating ratio above it, so stacking many aggravating factors
# can never push the probability past 1.
print(f"composite HEP        = {composite_hep(nominal, impact).value}")

# Stress the other direction: high stress, high complexity, poor
# procedures, assigned as bare numbers.
worst = resolve_levels(
    tables,
    {
        PsfId.Stress: 5.0,
        PsfId.Complexity: 5.0,
        PsfId.Procedures: 50.0,
    },
    Mode.Action,
)
print(f"aggravated impact    = {total_psf_impact(worst)}")
print(f"aggravated HEP       = {composite_hep(nominal, total_psf_impact(worst)).value}")

# One level is terminal: inadequate time means the task fails outright.
# The lookup returns a sentinel rather than a number so that callers
# cannot accidentally fold it into arithmetic.
certain = resolve_levels(
    tables, {PsfId.AvailableTime: "Inadequate Time"}, Mode.Diagnosis
)
assert certain is FAILURE_CERTAIN
print("inadequate time      -> failure certain, HEP = 1")
