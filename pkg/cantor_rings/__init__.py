"""
Cantor Rings
"""

import json
import logging
from pathlib import Path

_LOGGER: logging.Logger = logging.getLogger(__name__)

MANIFEST = json.loads((Path(__file__).parent / "manifest.json").read_text("utf-8"))

__version__ = MANIFEST["version"]
