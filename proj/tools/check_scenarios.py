"""Validates scenario files against docs/scenario.schema.json."""
import json
import sys
from pathlib import Path

import jsonschema


def main() -> int:
    root = Path(__file__).resolve().parent.parent
    schema = json.loads((root / "docs" / "scenario.schema.json").read_text())
    validator = jsonschema.Draft202012Validator(schema)
    paths = [Path(p) for p in sys.argv[1:]] or sorted((root / "scenarios").glob("*.json"))
    failed = 0
    for path in paths:
        errors = list(validator.iter_errors(json.loads(path.read_text())))
        for e in errors:
            print(f"{path.name}: {'/'.join(map(str, e.path)) or '<root>'}: {e.message}")
        failed += bool(errors)
        print(f"{'FAIL' if errors else 'ok'} {path.name}")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
