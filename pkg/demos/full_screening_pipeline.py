"""
End-to-end factor screening with the iterative pipeline
=======================================================

Each iteration trains a network ensemble on the observed data
restricted to the currently active factors, probes the ensemble over
a fresh composite design, fits a quadratic surface to the probe
responses, and eliminates factors whose terms never reach
significance.  The loop stops when an iteration eliminates nothing.

The saved result directory is the same layout the command line
``pipeline`` subcommand writes, so ``report`` can render plots
from it afterwards.
"""

import tempfile
from pathlib import Path

from hra_forge import (
    PipelineConfig,
    TrainingConfig,
    bundled_case_study,
    bundled_table4,
    run,
    save_result,
    summary_csv_text,
)
from hra_forge.cli import main as cli_main

obs = bundled_case_study()

# First iteration reuses the bundled design with its recorded
# reliability responses; later iterations generate their own and
# evaluate the freshly trained ensemble on them.
config = PipelineConfig(
    training=TrainingConfig(n_replications=3, max_epochs=3000),
    initial_design=bundled_table4(),
)

result = run(obs, config)
print(f"stopped: {result.reason} after {len(result.iterations)} iterations")
for rec in result.iterations:
    active = "".join(p.letter for p in rec.active)
    gone = ", ".join(p.name for p in rec.screening.eliminated) or "(none)"
    print(
        f"  iteration {rec.index}: active {active:<8s} "
        f"mse={rec.metric_report.mse:.3e}  eliminated {gone}"
    )
print(f"retained factors: {[p.name for p in result.final_retained]}")

print()
print(summary_csv_text(result))

outdir = Path(tempfile.mkdtemp()) / "screening"
save_result(result, obs, outdir)
saved = sorted(p.relative_to(outdir) for p in outdir.rglob("*") if p.is_file())
print(f"saved {len(saved)} files under {outdir.name}/")
for p in saved:
    print(f"  {p}")

# Render the diagnostic plots for every iteration.
code = cli_main(["report", "--result", str(outdir), "--out", str(outdir / "plots")])
assert code == 0
svgs = sorted(p.name for p in (outdir / "plots").glob("*.svg"))
print(f"\n{len(svgs)} plots written:")
for name in svgs:
    print(f"  {name}")
