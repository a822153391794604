"""Role-scoped HTTP+JSON API over the exam modules."""

from .accounts import ApiPrincipal, Role, load_accounts
from .app import ApiError, ExamService, ROUTES, make_server, serve_forever

__all__ = [
    "ApiError", "ApiPrincipal", "ExamService", "ROUTES", "Role",
    "load_accounts", "make_server", "serve_forever",
]
