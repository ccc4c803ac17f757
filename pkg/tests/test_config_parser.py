import os
import stat

import pytest

from refractlib import ConfigNodeType, ConfigParser, ConfigParserError


@pytest.fixture
def parser():
    """Provide a parser instance for tests."""
    return ConfigParser()


@pytest.fixture
def config_files(tmp_path):
    """Create a run document and a model document it can include."""
    model = tmp_path / "model.cfg"
    model.write_text(
        "Model: cramer_lundberg\n"
        "    c: 9\n"
        "    eta: 5\n"
        "    alpha: 1\n"
    )

    main = tmp_path / "main.cfg"
    main.write_text(
        "# Refracted Cramer-Lundberg run\n"
        "Include: model.cfg\n"
        "\n"
        "Refraction:\n"
        "    delta: 3\n"
        "Query:\n"
        "    x: 1, 5\n"
        "    r: 1\n"
    )

    return tmp_path


def test_basic_parsing(parser):
    """Test that sections and their entries are read."""
    input_text = (
        "Model: brownian\n"
        "    c: 6\n"
        "    sigma: 6\n"
        "Query:\n"
        "    x: 10\n"
        "    r: 4\n"
    )

    root = parser.parse(input_text, "run.cfg", [])
    model = root.section(ConfigNodeType.MODEL)
    assert model.value == "brownian"
    assert model.entries() == {"c": "6", "sigma": "6"}
    assert root.section(ConfigNodeType.QUERY).entries() == {"x": "10", "r": "4"}
    assert root.section(ConfigNodeType.MC) is None


def test_keywords_are_case_insensitive(parser):
    """Test that section keywords are recognised whatever their case."""
    root = parser.parse("refraction:\n    delta: 2\n", "run.cfg", [])
    assert root.section(ConfigNodeType.REFRACTION).entries() == {"delta": "2"}


def test_entry_values_keep_inner_text(parser):
    """Test that list and matrix values are passed through untouched."""
    input_text = (
        "Model: phase_type\n"
        "    t_mat: -2, 2; 0, -2\n"
    )

    root = parser.parse(input_text, "run.cfg", [])
    assert root.section(ConfigNodeType.MODEL).entries()["t_mat"] == "-2, 2; 0, -2"


def test_comments_and_blank_lines(parser):
    """Test that comment lines and blank lines are skipped."""
    input_text = (
        "# leading comment\n"
        "\n"
        "Query:\n"
        "    # inner comment\n"
        "    x: 1\n"
        "\n"
    )

    root = parser.parse(input_text, "run.cfg", [])
    assert root.section(ConfigNodeType.QUERY).entries() == {"x": "1"}


def test_empty_input(parser):
    """Test that an empty document gives an empty tree."""
    root = parser.parse("", "run.cfg", [])
    assert root.node_type == ConfigNodeType.ROOT
    assert root.children == []


def test_entry_line_numbers(parser):
    """Test that entries remember where they were read."""
    root = parser.parse("Query:\n    x: 1\n    r: 2\n", "run.cfg", [])
    entries = root.section(ConfigNodeType.QUERY).children
    assert [entry.line for entry in entries] == [2, 3]
    assert entries[0].filename == "run.cfg"


def test_duplicate_section_error(parser):
    """Test that a repeated section is reported."""
    input_text = (
        "Query:\n"
        "    x: 1\n"
        "Query:\n"
        "    x: 2\n"
    )

    with pytest.raises(ConfigParserError) as exc_info:
        parser.parse(input_text, "run.cfg", [])

    error = exc_info.value.errors[0]
    assert "'Query' already defined" in error.message
    assert error.line == 3


def test_duplicate_key_error(parser):
    """Test that a repeated key within a section is reported."""
    input_text = (
        "Refraction:\n"
        "    delta: 1\n"
        "    delta: 2\n"
    )

    with pytest.raises(ConfigParserError) as exc_info:
        parser.parse(input_text, "run.cfg", [])

    assert "'delta' already defined" in exc_info.value.errors[0].message


def test_malformed_entry(parser):
    """Test that a line without a key and value is reported."""
    with pytest.raises(ConfigParserError) as exc_info:
        parser.parse("Query:\n    x 1\n", "run.cfg", [])

    error = exc_info.value.errors[0]
    assert error.message == "Expected 'key: value' entry"
    assert error.line == 2
    assert error.column == 5


def test_empty_entry_value(parser):
    """Test that an entry may have an empty value."""
    root = parser.parse("Query:\n    x:\n    r: 1\n", "run.cfg", [])
    assert root.section(ConfigNodeType.QUERY).entries() == {"x": "", "r": "1"}


def test_entry_without_key(parser):
    """Test that a line with a value but no key is reported."""
    with pytest.raises(ConfigParserError) as exc_info:
        parser.parse("Query:\n    : 1\n", "run.cfg", [])

    assert exc_info.value.errors[0].message == "Expected 'key: value' entry"


def test_top_level_entry(parser):
    """Test that an entry outside any section is reported."""
    with pytest.raises(ConfigParserError) as exc_info:
        parser.parse("x: 1\n", "run.cfg", [])

    assert "Unexpected token" in exc_info.value.errors[0].message


def test_bad_indent(parser):
    """Test that indentation not in steps of four spaces is reported."""
    input_text = (
        "Model: brownian\n"
        "   c: 6\n"
    )

    with pytest.raises(ConfigParserError) as exc_info:
        parser.parse(input_text, "run.cfg", [])

    assert "Expected indent" in exc_info.value.errors[0].message


def test_missing_indent(parser):
    """Test that a section with no indented entries is reported."""
    with pytest.raises(ConfigParserError) as exc_info:
        parser.parse("Refraction:\nQuery:\n    x: 1\n", "run.cfg", [])

    assert "Expected description or indent for 'Refraction' section" in exc_info.value.errors[0].message


def test_tab_characters(parser):
    """Test that tab indentation is reported."""
    input_text = (
        "Query:\n"
        "    x: 1\n"
        "\tr: 1\n"
    )

    with pytest.raises(ConfigParserError) as exc_info:
        parser.parse(input_text, "run.cfg", [])

    messages = [error.message for error in exc_info.value.errors]
    assert "Tab characters are not allowed; use spaces for indentation" in messages


def test_errors_are_collected(parser):
    """Test that all syntax errors of a document are reported together."""
    input_text = (
        "Query:\n"
        "    x 1\n"
        "    r 1\n"
    )

    with pytest.raises(ConfigParserError) as exc_info:
        parser.parse(input_text, "run.cfg", [])

    assert [error.line for error in exc_info.value.errors] == [2, 3]


def test_include_rel_path(parser, config_files):
    """Test that an Include directive is resolved beside the including file."""
    root = parser.parse_file(str(config_files / "main.cfg"), [])
    model = root.section(ConfigNodeType.MODEL)
    assert model.value == "cramer_lundberg"
    assert model.entries() == {"c": "9", "eta": "5", "alpha": "1"}
    assert model.filename.endswith("model.cfg")
    assert root.section(ConfigNodeType.REFRACTION).entries() == {"delta": "3"}


def test_include_abs_path(parser, config_files):
    """Test that an absolute Include path is used as is."""
    input_text = (
        f"Include: {config_files / 'model.cfg'}\n"
        "Query:\n"
        "    x: 1\n"
    )

    root = parser.parse(input_text, "run.cfg", [])
    assert root.section(ConfigNodeType.MODEL).value == "cramer_lundberg"


def test_include_search_paths(parser, tmp_path, config_files):
    """Test that Include falls back to the search paths."""
    other = tmp_path / "other"
    other.mkdir()
    main = other / "run.cfg"
    main.write_text("Include: model.cfg\n")

    root = parser.parse_file(str(main), [str(config_files)])
    assert root.section(ConfigNodeType.MODEL).value == "cramer_lundberg"


def test_recursive_includes(parser, tmp_path):
    """Test that a file included twice is reported."""
    first = tmp_path / "first.cfg"
    first.write_text("Include: second.cfg\n")
    second = tmp_path / "second.cfg"
    second.write_text("Include: first.cfg\n")

    with pytest.raises(ConfigParserError) as exc_info:
        parser.parse_file(str(first), [])

    assert any("has already been used" in error.message for error in exc_info.value.errors)


def test_include_file_not_found(parser, tmp_path):
    """Test that a missing included file is reported at the Include line."""
    main = tmp_path / "main.cfg"
    main.write_text(
        "Query:\n"
        "    x: 1\n"
        "Include: nonexistent.cfg\n"
    )

    with pytest.raises(ConfigParserError) as exc_info:
        parser.parse_file(str(main), [])

    error = exc_info.value.errors[0]
    assert "File not found: nonexistent.cfg" in error.message
    assert error.line == 3


def test_include_missing_filename(parser):
    """Test that an Include with no file name is reported."""
    with pytest.raises(ConfigParserError) as exc_info:
        parser.parse("Include:\nQuery:\n    x: 1\n", "run.cfg", [])

    assert "Expected file name for 'Include'" in exc_info.value.errors[0].message


def test_file_not_found(parser):
    """Test that a missing document is reported."""
    with pytest.raises(ConfigParserError) as exc_info:
        parser.parse_file("missing.cfg", [])

    assert any("File not found" in str(error.message) for error in exc_info.value.errors)


def test_directory_error(parser, tmp_path):
    """Test that a directory given as the document is reported."""
    with pytest.raises(ConfigParserError) as exc_info:
        parser.parse_file(str(tmp_path), [])

    assert "Is a directory" in exc_info.value.errors[0].message


@pytest.mark.skipif(os.name != "posix" or os.geteuid() == 0, reason="needs POSIX permissions as a normal user")
def test_file_permission_error(parser, tmp_path):
    """Test that an unreadable document is reported."""
    p = tmp_path / "readonly.cfg"
    p.write_text("Query:\n    x: 1\n")
    os.chmod(p, stat.S_IWRITE)
    try:
        with pytest.raises(ConfigParserError) as exc_info:
            parser.parse_file(str(p), [])

        assert "You do not have permission to access" in exc_info.value.errors[0].message

    finally:
        os.chmod(p, stat.S_IWRITE | stat.S_IREAD)
