import json
import subprocess
import sys
import tempfile
from pathlib import Path

import jsonschema

binary, schema_path = sys.argv[1], sys.argv[2]
schema = json.loads(Path(schema_path).read_text())

with tempfile.TemporaryDirectory() as tmp:
    data = Path(tmp) / "d.csv"
    subprocess.run([binary, "generate", "--dataset", "separated_blobs", "--out", str(data)], check=True)
    runs = [
        ["--clusters", "2", "--seed", "1"],
        ["--likelihood", "exponential", "--restarts", "2"],
        ["--prior", "kneighbor:3", "--restarts", "2"],
        ["--background", "pairwise_bound", "--restarts", "2"],
    ]
    for flags in runs:
        out = Path(tmp) / "r.json"
        subprocess.run([binary, "fit", "--input", str(data), "--out", str(out), *flags], check=True)
        jsonschema.validate(json.loads(out.read_text()), schema)
        print("valid:", " ".join(flags))
