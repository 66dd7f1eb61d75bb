"""Generate the api pages, their navigation and the output schema page.

Run by the mkdocs gen-files plugin from the repository root.
"""

import json
import os
from pathlib import Path

import mkdocs_gen_files

package = os.getenv("PACKAGE", "metric_dcov")
schema_dir = Path(os.getenv("SCHEMA_DIR", "docs/schemas"))

nav = mkdocs_gen_files.Nav()
for path in sorted(Path(package).glob("**/*.py")):
    module = path.with_suffix("")
    if path.stem.startswith("_") or path.parent.name == "data":
        continue
    with mkdocs_gen_files.open(f"api/{module}.md", "w") as f:
        print(f"::: {'.'.join(module.parts)}", file=f)
    nav[module.parts] = f"{module}.md"

with mkdocs_gen_files.open("api/navigation.md", "w") as nav_file:
    nav_file.writelines(nav.build_literate_nav())

# one section per subcommand payload, listing its required keys
with mkdocs_gen_files.open("schemas.md", "w") as f:
    print("# Output schemas\n", file=f)
    print("Every `mdcov` subcommand writes one JSON object.", file=f)
    print("Failures write the `error` object as the last stderr line.\n", file=f)
    for schema_file in sorted(schema_dir.glob("*.json")):
        schema = json.loads(schema_file.read_text())
        print(f"## {schema_file.stem}\n", file=f)
        if schema.get("description"):
            print(f"{schema['description']}\n", file=f)
        print("| key | type | required |", file=f)
        print("| --- | --- | --- |", file=f)
        required = set(schema.get("required", []))
        for key, prop in schema.get("properties", {}).items():
            kind = prop.get("type", "any")
            if isinstance(kind, list):
                kind = " or ".join(kind)
            print(f"| `{key}` | {kind} | {'yes' if key in required else ''} |", file=f)
        print("", file=f)
