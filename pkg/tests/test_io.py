import pytest
from oscillation_lab.utils.io import archive_copy, run_timestamp, sanitize_filename
from freezegun import freeze_time

@pytest.mark.parametrize(
    "input_str,expected",
    [
        ("comb", "comb"),
        ("column 2", "column_2"),
        ("runs/omega", "runs_omega"),
        ("A:1?", "A_1_"),
        ("real-line_50.json", "real-line_50.json"),
    ],
    ids=[
        "alphanumeric",
        "space",
        "slash",
        "punctuation",
        "safe-mixed",
    ],
)
def test_sanitize_filename(input_str, expected):
    assert sanitize_filename(input_str) == expected


@freeze_time("2024-07-01 12:34:56")
def test_run_timestamp():
    assert run_timestamp() == "20240701T123456Z"


@pytest.mark.parametrize(
    "timestamp,expected_timestamp",
    [
        (None, "20240701T123456Z"),
        ("20240101T120000Z", "20240101T120000Z"),
    ],
    ids=["default_timestamp", "explicit_timestamp"],
)
@freeze_time("2024-07-01 12:34:56")
def test_archive_copy(tmp_path, timestamp, expected_timestamp):
    source = tmp_path / "out" / "omega profile.csv"
    source.parent.mkdir()
    source.write_text("kind,n,value\nOmega,1,1.0\n", encoding="utf-8")
    path = archive_copy(source, tmp_path / "archive", "oscillation", timestamp=timestamp)
    assert path == tmp_path / "archive" / "oscillation" / expected_timestamp / "omega_profile.csv"
    assert path.read_text(encoding="utf-8") == source.read_text(encoding="utf-8")
    latest = tmp_path / "archive" / "oscillation" / "latest" / "omega_profile.csv"
    assert latest.is_file()
    assert latest.read_bytes() == source.read_bytes()


def test_archive_copy_refreshes_latest(tmp_path):
    source = tmp_path / "report.json"
    source.write_text("{}", encoding="utf-8")
    archive_copy(source, tmp_path / "archive", "ucset", timestamp="20240101T000000Z")
    source.write_text('{"verdict": "defect"}', encoding="utf-8")
    archive_copy(source, tmp_path / "archive", "ucset", timestamp="20240102T000000Z")
    base = tmp_path / "archive" / "ucset"
    assert (base / "20240101T000000Z" / "report.json").read_text(encoding="utf-8") == "{}"
    assert (base / "latest" / "report.json").read_text(encoding="utf-8") == '{"verdict": "defect"}'
