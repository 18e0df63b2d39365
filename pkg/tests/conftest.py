from pathlib import Path

import pytest

REPO_ROOT = Path(__file__).resolve().parent.parent
EXAMPLES_DIR = REPO_ROOT / "docs" / "examples"


@pytest.fixture(scope="session")
def demo_template_path() -> Path:
    return EXAMPLES_DIR / "deployment_demo.template.json"


@pytest.fixture(scope="session")
def demo_gen_spec_path() -> Path:
    return EXAMPLES_DIR / "deployment_demo.gen.json"


@pytest.fixture(scope="session")
def wedge_template_path() -> Path:
    return EXAMPLES_DIR / "patrol_wedge.template.json"


@pytest.fixture(scope="session")
def demo_template(demo_template_path):
    from fgrmatch.fileio import load_template

    return load_template(demo_template_path)


@pytest.fixture(scope="session")
def wedge_template(wedge_template_path):
    from fgrmatch.fileio import load_template

    return load_template(wedge_template_path)
