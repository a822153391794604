"""Static account fixture: id, role, token triples loaded from JSON."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from pathlib import Path


class Role(enum.Enum):
    LECTURER = "LECTURER"
    STUDENT = "STUDENT"


@dataclass(frozen=True)
class ApiPrincipal:
    account_id: str
    role: Role
    token: str


def load_accounts(path: Path) -> dict[str, ApiPrincipal]:
    """token -> principal map from a JSON list of {id, role, token}."""
    raw = json.loads(Path(path).read_text())
    out: dict[str, ApiPrincipal] = {}
    for item in raw:
        principal = ApiPrincipal(account_id=item["id"], role=Role(item["role"]),
                                 token=item["token"])
        if principal.token in out:
            raise ValueError(f"duplicate token for account {principal.account_id!r}")
        out[principal.token] = principal
    return out
