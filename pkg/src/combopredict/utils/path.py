"""
Path resolution utilities for combopredict

Config files and data files (survival curves, waterfalls) referenced from a
config are looked up in a fixed order so the same config works from a
checkout, an installed package and the test suite.
"""

import pathlib
from typing import Optional, Union

PACKAGE_ROOT = pathlib.Path(__file__).parent.parent
FIXTURES_DIR = PACKAGE_ROOT / "fixtures"
BUNDLED_CONFIG = PACKAGE_ROOT / "configs" / "config.yaml"


def resolve_config_path(config_path: Optional[Union[str, pathlib.Path]] = None) -> str:
    """
    Resolve configuration file path

    Tries multiple locations in order:
    1. Absolute path or path relative to current working directory
    2. Path relative to project root
    3. configs/config.yaml under the current working directory
    4. Path relative to home directory (~/.combopredict/config.yaml)
    5. The config bundled with the package, only when no path was given

    Args:
        config_path: Path to configuration file, or None for the defaults

    Returns:
        Resolved absolute path to config file

    Raises:
        FileNotFoundError: If config file cannot be found in any location

    Examples:
        >>> resolve_config_path("configs/config.yaml")
        '/path/to/project/configs/config.yaml'

        >>> resolve_config_path()
        '/path/to/site-packages/combopredict/configs/config.yaml'
    """
    # Navigate from src/combopredict/utils/path.py -> project root
    project_root = PACKAGE_ROOT.parent.parent
    candidates = []
    if config_path is not None:
        candidates += [pathlib.Path(config_path).expanduser(), project_root / config_path]
    candidates += [
        pathlib.Path.cwd() / "configs" / "config.yaml",
        pathlib.Path.home() / ".combopredict" / "config.yaml",
    ]
    if config_path is None:
        candidates.append(BUNDLED_CONFIG)

    for path in candidates:
        if path.is_file():
            return str(path.absolute())

    tried = "\n".join(f"  - {path}" for path in candidates)
    raise FileNotFoundError(f"Configuration file not found. Tried:\n{tried}")


def resolve_data_path(
    data_path: Union[str, pathlib.Path],
    base_dir: Optional[Union[str, pathlib.Path]] = None,
) -> pathlib.Path:
    """
    Resolve a data file referenced on the command line or in a config

    Tries the path as given, then relative to ``base_dir`` (usually the
    config's directory), then the bundled fixtures directory.

    Raises:
        FileNotFoundError: If the file exists in none of these places
    """
    path = pathlib.Path(data_path).expanduser()
    candidates = [path]
    if base_dir is not None:
        candidates.append(pathlib.Path(base_dir) / path)
    candidates.append(FIXTURES_DIR / path.name)

    for candidate in candidates:
        if candidate.is_file():
            return candidate.absolute()

    tried = "\n".join(f"  - {c}" for c in candidates)
    raise FileNotFoundError(f"Data file '{data_path}' not found. Tried:\n{tried}")


def fixture_path(name: str) -> pathlib.Path:
    """Absolute path of a bundled fixture file"""
    path = FIXTURES_DIR / name
    if not path.is_file():
        raise FileNotFoundError(f"No bundled fixture named '{name}'")
    return path
