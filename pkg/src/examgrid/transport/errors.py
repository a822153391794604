"""Transport error hierarchy, shared by both backends."""


class TransportError(Exception):
    """Base class: every backend failure carries detail text."""


class ConnectionFailed(TransportError):
    pass


class AuthFailed(TransportError):
    pass


class WriteFailed(TransportError):
    pass


class ReadFailed(TransportError):
    pass


class NotFound(TransportError):
    pass


class BadLocator(TransportError):
    pass


class FtpProtocolError(TransportError):
    """The server spoke something the RFC 959 subset does not cover."""
