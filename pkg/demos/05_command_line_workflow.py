# %% [markdown]
# # The command-line workflow
#
# Every stage is also reachable from the `wdspectral` command. This script
# drives it in-process on a small problem inside a temporary directory and
# shows the files it writes.

# %%
import pathlib
import tempfile

from wdspectral.cli import main

work = pathlib.Path(tempfile.mkdtemp(prefix="wdspectral-demo-"))
cfg = work / "run.cfg"
cfg.write_text("""\
# small curved run
basis = oscillator
N = 12
k = 1
chi = 4
grid_M = 64
""")

# %%
main(["solve", "--config", str(cfg), "--out", str(work)])
main(["solve", "--config", str(cfg), "--N", "7", "--out", str(work), "--archive", "coarse.txt"])
main(["compare", str(work / "solution.txt"), str(work / "coarse.txt")])

# %%
main(["classical", "--config", str(cfg), "--out", str(work)])
main(["crest", str(work / "solution.txt"), "--trajectory-csv", str(work / "trajectory.csv"),
      "--out", str(work)])

# %% [markdown]
# A sweep over N against the closed form needs k = 0, so override it here.

# %%
main(["sweep", "--config", str(cfg), "--k", "0", "--parameter", "N", "--values", "6", "9", "12",
      "--out", str(work)])
print((work / "sweep.csv").read_text())
print(sorted(p.name for p in work.iterdir()))
