"""
db module
Handles persistence of command runs into an SQLite ledger.
"""

import hashlib
import json
import sqlite3
from pathlib import Path


def run_key(command: str, config: dict) -> str:
    """
    SHA-256 of the command and its canonical (sorted-key) configuration.

    :param command: Subcommand name.
    :type command: str
    :param config: JSON-serializable run configuration.
    :type config: dict
    :returns: Hex digest.
    :rtype: str
    """
    canonical = json.dumps({"command": command, "config": config}, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


class RunLedger:
    """
    Handles SQLite persistence for the runs table.

    :ivar conn: Active SQLite connection.
    :vartype conn: sqlite3.Connection
    """

    def __init__(self, db_path: str):
        """
        Initialize the ledger by ensuring the database directory exists,
        connecting to the SQLite database, and creating the schema if needed.

        :param db_path: Filesystem path to the SQLite database file.
        :type db_path: str
        :raises OSError: If the database directory cannot be created.
        """
        if db_path != ":memory:":
            Path(db_path).parent.mkdir(parents=True, exist_ok=True)
        self.conn = sqlite3.connect(db_path)
        self._init_schema()

    def _init_schema(self):
        cur = self.conn.cursor()
        cur.execute(
            """
        CREATE TABLE IF NOT EXISTS runs (
            run_key     TEXT PRIMARY KEY,
            command     TEXT,
            verdict     TEXT,
            exit_code   INTEGER,
            output_path TEXT,
            first_seen  TIMESTAMP,
            last_seen   TIMESTAMP
        )
        """
        )
        self.conn.commit()

    def record_run(self, record):
        """
        Insert a new run or update an existing one based on run_key.
        Sets first_seen on insert; always updates last_seen, verdict and exit code.

        :param record: Run record with keys 'run_key', 'command', 'verdict',
                       'exit_code', 'output_path', 'ran_at'.
        :type record: dict
        :returns: None
        """
        ts = record.get("ran_at")
        self.conn.execute(
            """
        INSERT INTO runs (run_key, command, verdict, exit_code, output_path, first_seen, last_seen)
        VALUES (?, ?, ?, ?, ?, ?, ?)
        ON CONFLICT(run_key) DO UPDATE SET
            command = excluded.command,
            verdict = excluded.verdict,
            exit_code = excluded.exit_code,
            output_path = excluded.output_path,
            last_seen = excluded.last_seen
        """,
            (
                record.get("run_key"),
                record.get("command"),
                record.get("verdict"),
                record.get("exit_code"),
                record.get("output_path"),
                ts,
                ts,
            ),
        )
        self.conn.commit()

    def close(self):
        self.conn.close()
