import sys
import hashlib
from pathlib import Path

import yaml
from jsonschema import validate, ValidationError

ROOT = Path(__file__).parent.parent
sys.path.insert(0, str(ROOT))

from src.core.models import ScenarioFile  # noqa: E402

presets_dir = ROOT / "presets"


def sha256sum(filename):
    h = hashlib.sha256()
    with open(filename, 'rb') as f:
        while True:
            chunk = f.read(8192)
            if not chunk:
                break
            h.update(chunk)
    return h.hexdigest()


def main():
    schema = ScenarioFile.model_json_schema()
    failed = False
    for path in sorted(presets_dir.glob("*.yaml")):
        with open(path) as f:
            preset = yaml.safe_load(f)
        try:
            validate(instance=preset, schema=schema)
            print(f"✅ {path.name} is valid!")
            print(f"SHA256: {sha256sum(path)}")
        except ValidationError as e:
            print(f"❌ {path.name} validation error: {e.message}")
            failed = True
    if failed:
        sys.exit(1)


if __name__ == "__main__":
    main()
