from pathlib import Path
import datetime
import re
import shutil


def sanitize_filename(s):
    """
    Sanitize a string to be safe for use as a filename.

    :param s: The input string to sanitize (e.g., an instance or subset name).
    :type s: str
    :returns: A sanitized string safe for use as a filename (alphanumeric, dash, underscore, dot).
    :rtype: str
    """
    return re.sub(r'[^\w\-_\.]+', '_', s)


def run_timestamp():
    return datetime.datetime.now(datetime.timezone.utc).strftime("%Y%m%dT%H%M%SZ")


def archive_copy(source, archive_dir, command, timestamp=None):
    """
    Copy a finished output file into a timestamped archive and refresh the
    ``latest`` copy next to it.

    :param source: Path of the output file to archive.
    :type source: str or pathlib.Path
    :param archive_dir: Root of the archive.
    :type archive_dir: str or pathlib.Path
    :param command: Subcommand that produced the output (e.g. 'oscillation').
    :type command: str
    :param timestamp: Optional timestamp string (YYYYMMDDTHHMMSSZ). If not provided, use now (UTC).
    :type timestamp: str or None
    :returns: Path to the archived copy.
    :rtype: pathlib.Path

    The files will be written to:
        <archive_dir>/<command>/<YYYYMMDDTHHMMSSZ>/<filename>
        <archive_dir>/<command>/latest/<filename>
    """
    source = Path(source)
    base_dir = Path(archive_dir) / sanitize_filename(command)
    if timestamp is None:
        timestamp = run_timestamp()
    run_dir = base_dir / timestamp
    run_dir.mkdir(parents=True, exist_ok=True)
    path = run_dir / sanitize_filename(source.name)
    shutil.copyfile(source, path)
    latest = base_dir / "latest"
    latest.mkdir(parents=True, exist_ok=True)
    shutil.copyfile(source, latest / path.name)
    return path
