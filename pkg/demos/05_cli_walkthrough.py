"""The ``flowindex`` command line on a scenario written to disk.

Equivalent shell commands::

    flowindex verify --scenario R1 --crossings
    flowindex verify --scenario shift.json --csv
    flowindex suite --seeds 1..5 --m 2 --csv
    flowindex curves --scenario L1 --samples 64 --out curves/
"""

import json
import tempfile
from pathlib import Path

from flowindex.harness.catalog import catalog_scenario
from flowindex.harness.cli import main
from flowindex.harness.schema import scenario_to_dict

work = Path(tempfile.mkdtemp(prefix="flowindex-demo-"))

print("$ flowindex verify --scenario R1 --crossings")
code = main(["verify", "--scenario", "R1", "--crossings"])
print("exit code", code)

# scenarios are plain JSON; complex entries are [re, im] pairs
spec = scenario_to_dict(catalog_scenario("P1"))
spec["label"] = "shift"
(work / "shift.json").write_text(json.dumps(spec, indent=2))
print(f"\n$ flowindex verify --scenario {work / 'shift.json'} --csv")
main(["verify", "--scenario", str(work / "shift.json"), "--csv"])

print("\n$ flowindex suite --seeds 1..5 --m 2 --csv")
main(["suite", "--seeds", "1..5", "--m", "2", "--csv"])

print(f"\n$ flowindex curves --scenario L1 --samples 64 --out {work / 'curves'}")
main(["curves", "--scenario", "L1", "--samples", "64", "--out", str(work / "curves")])

# a broken input: the boundary phase is missing, exit code 2 with the field path on stderr
broken = scenario_to_dict(catalog_scenario("R1"))
del broken["boundary"]["theta0"]
(work / "broken.json").write_text(json.dumps(broken))
print("\n$ flowindex verify --scenario broken.json")
print("exit code", main(["verify", "--scenario", str(work / "broken.json")]))
