"""
Capture File Naming

``{prefix}__{FromID}-to-{ToID}__{suffix}.pcap``: the double underscore
separates fields, so no token may contain it.
"""

import re

from .exceptions import InvalidToken

TOKEN = re.compile(r'^[A-Za-z0-9-]+$')


def check_token(token: str) -> str:
    if not TOKEN.match(token) or '__' in token:
        raise InvalidToken(token)
    return token


def capture_filename(prefix: str, from_id: str, to_id: str, suffix: str) -> str:
    """
    Build the capture file name of one link direction.

    Raises:
        InvalidToken: A part is empty or contains separator characters
    """
    for token in (prefix, from_id, to_id, suffix):
        check_token(token)
    return f"{prefix}__{from_id}-to-{to_id}__{suffix}.pcap"
