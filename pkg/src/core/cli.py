"""
Command Helpers

Exit codes and scenario loading shared by the management commands.
"""

from pathlib import Path

from django.core.management.base import CommandError

from scenario.exceptions import ParseError, ValidationError
from scenario.models import ScenarioConfig
from scenario.parser import load_config, resolve_preset

EXIT_FINDINGS = 1
EXIT_USAGE = 2
EXIT_IO = 3


def io_error(path, e: OSError) -> CommandError:
    return CommandError(f"cannot access {path}: {e.strerror or e}", returncode=EXIT_IO)


def load_scenario(name_or_path: str) -> tuple[Path, ScenarioConfig]:
    """
    Resolve and load a scenario file or preset name.

    Raises:
        CommandError: returncode 3 when unreadable, 1 when invalid
    """
    path = resolve_preset(name_or_path)
    try:
        return path, load_config(path)
    except OSError as e:
        raise io_error(path, e) from e
    except (ParseError, ValidationError) as e:
        raise CommandError(f"{path}: {e}", returncode=EXIT_FINDINGS) from e
