"""Minimal FTP client, passive mode only.

Speaks the command subset the drop-box needs: USER, PASS, CWD, TYPE I,
PASV, STOR, RETR, NLST, RNFR/RNTO, QUIT. Binary mode (TYPE I) is set once
after login, before any transfer.
"""

from __future__ import annotations

import re
import socket

from .errors import (AuthFailed, ConnectionFailed, FtpProtocolError, NotFound,
                     ReadFailed, WriteFailed)

CRLF = "\r\n"
_PASV_RE = re.compile(r"(\d+),(\d+),(\d+),(\d+),(\d+),(\d+)")


class FtpClient:
    def __init__(self, host: str, port: int = 21, timeout: float = 10.0):
        self.host = host
        self.port = port
        self.timeout = timeout
        self.sock: socket.socket | None = None
        self.file = None

    # -- plumbing ---------------------------------------------------------

    def connect(self) -> str:
        try:
            self.sock = socket.create_connection((self.host, self.port), self.timeout)
        except OSError as exc:
            raise ConnectionFailed(f"ftp connect {self.host}:{self.port}: {exc}") from exc
        self.file = self.sock.makefile("r", encoding="latin-1", newline="\r\n")
        return self._expect("2")

    def _getline(self) -> str:
        try:
            line = self.file.readline()
        except OSError as exc:
            raise ConnectionFailed(f"control connection died: {exc}") from exc
        if not line:
            raise ConnectionFailed("server closed the control connection")
        return line.rstrip("\r\n")

    def _getresp(self) -> str:
        line = self._getline()
        if len(line) > 3 and line[3] == "-":  # multiline: read to the closing code
            code = line[:3]
            while True:
                more = self._getline()
                if more.startswith(code) and (len(more) == 3 or more[3] != "-"):
                    break
        return line

    def _cmd(self, command: str) -> str:
        assert self.sock is not None, "not connected"
        self.sock.sendall((command + CRLF).encode("latin-1"))
        return self._getresp()

    def _expect(self, prefix: str, command: str | None = None) -> str:
        resp = self._cmd(command) if command else self._getresp()
        if not resp.startswith(prefix):
            raise FtpProtocolError(f"{command or 'greeting'} -> {resp}")
        return resp

    # -- session ----------------------------------------------------------

    def login(self, user: str, password: str) -> None:
        resp = self._cmd(f"USER {user}")
        if resp.startswith("3"):
            resp = self._cmd(f"PASS {password}")
        if not resp.startswith("2"):
            raise AuthFailed(f"login rejected: {resp}")

    def cwd(self, directory: str) -> None:
        self._expect("2", f"CWD {directory}")

    def binary(self) -> None:
        self._expect("2", "TYPE I")

    def quit(self) -> None:
        try:
            if self.sock is not None:
                self._cmd("QUIT")
        except Exception:
            pass
        finally:
            if self.file is not None:
                self.file.close()
            if self.sock is not None:
                self.sock.close()
            self.sock = None
            self.file = None

    # -- transfers (passive only) ------------------------------------------

    def _pasv(self) -> socket.socket:
        resp = self._expect("227", "PASV")
        m = _PASV_RE.search(resp)
        if not m:
            raise FtpProtocolError(f"unparseable PASV reply: {resp}")
        nums = [int(g) for g in m.groups()]
        host = ".".join(str(n) for n in nums[:4])
        port = nums[4] * 256 + nums[5]
        try:
            return socket.create_connection((host, port), self.timeout)
        except OSError as exc:
            raise ConnectionFailed(f"ftp data connect {host}:{port}: {exc}") from exc

    def _drain(self, data: socket.socket) -> bytes:
        chunks = []
        with data:
            while True:
                chunk = data.recv(65536)
                if not chunk:
                    break
                chunks.append(chunk)
        return b"".join(chunks)

    def stor(self, name: str, blob: bytes) -> None:
        data = self._pasv()
        resp = self._cmd(f"STOR {name}")
        if not resp.startswith("1"):
            data.close()
            raise WriteFailed(f"STOR {name}: {resp}")
        with data:
            data.sendall(blob)
        self._expect("2")

    def retr(self, name: str) -> bytes:
        data = self._pasv()
        resp = self._cmd(f"RETR {name}")
        if resp.startswith("550"):
            data.close()
            raise NotFound(f"RETR {name}: {resp}")
        if not resp.startswith("1"):
            data.close()
            raise ReadFailed(f"RETR {name}: {resp}")
        blob = self._drain(data)
        self._expect("2")
        return blob

    def nlst(self) -> list[str]:
        data = self._pasv()
        resp = self._cmd("NLST")
        if not resp.startswith("1"):
            data.close()
            raise ReadFailed(f"NLST: {resp}")
        text = self._drain(data).decode("latin-1")
        self._expect("2")
        return [line for line in text.replace("\r\n", "\n").split("\n") if line]

    def rename(self, old: str, new: str) -> None:
        self._expect("3", f"RNFR {old}")
        self._expect("2", f"RNTO {new}")
