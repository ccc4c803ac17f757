# Copyright 2026 refractlib developers
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
import os
from pathlib import Path

from typing import Dict, List, Optional, Set

from .config_token import Token, TokenType
from .config_lexer import ConfigLexer
from .config_node import ConfigNode, ConfigNodeType

class ConfigParserFileAlreadyUsedError(Exception):
    """Exception raised when a file is used more than once."""
    def __init__(self, filename: str, token: Token) -> None:
        super().__init__(f"The file '{filename}' has already been used.")
        self.filename: str = filename
        self.token: Token = token


class ConfigSyntaxError(Exception):
    """Exception generated when there is a syntax error."""
    def __init__(self, message: str, filename: str, line: int, column: int, input_text: str) -> None:
        super().__init__(f"{message}: file: {filename}, line {line}, column {column}, ")
        self.message: str = message
        self.filename: str = filename
        self.line: int = line
        self.column: int = column
        self.input_text: str = input_text


class ConfigParserError(Exception):
    """Exception wrapper generated when there is a syntax error."""
    def __init__(self, message: str, errors: List[ConfigSyntaxError]) -> None:
        super().__init__(message)
        self.errors: List[ConfigSyntaxError] = errors


class ConfigParser:
    """
    Parser that turns configuration tokens into a ConfigNode tree.

    Attributes:
        syntax_tree (ConfigNode): The root node of the tree.
        parse_errors (List[ConfigSyntaxError]): Syntax errors encountered during parsing.
        lexers (List[ConfigLexer]): Stack of lexers used for included files.
        previously_seen_files (Set[str]): Canonical filenames already processed.
        search_paths (List[str]): Paths searched for included files after the including file's directory.
        current_token (Optional[Token]): The current token being processed.
    """
    SECTIONS: Dict[TokenType, ConfigNodeType] = {
        TokenType.MODEL: ConfigNodeType.MODEL,
        TokenType.REFRACTION: ConfigNodeType.REFRACTION,
        TokenType.QUERY: ConfigNodeType.QUERY,
        TokenType.MC: ConfigNodeType.MC,
        TokenType.OUTPUT: ConfigNodeType.OUTPUT
    }

    def __init__(self) -> None:
        self.syntax_tree: ConfigNode = ConfigNode(ConfigNodeType.ROOT, "")
        self.parse_errors: List[ConfigSyntaxError] = []
        self.lexers: List[ConfigLexer] = []
        self.previously_seen_files: Set[str] = set()
        self.search_paths: List[str] = []
        self.current_token: Optional[Token] = None

    def parse(self, input_text: str, filename: str, search_paths: List[str]) -> ConfigNode:
        """
        Parse an input string and construct the configuration tree.

        Args:
            input_text (str): The text to be parsed.
            filename (str): The name of the file being parsed.
            search_paths (List[str]): List of paths to search for included files.

        Returns:
            ConfigNode: The root of the tree; one child per section.

        Raises:
            ConfigParserError: If there are syntax errors during parsing.
        """
        self.search_paths = search_paths

        try:
            self.lexers.append(ConfigLexer(input_text, filename))
            seen_sections: Set[TokenType] = set()

            while True:
                token = self.get_next_token()
                if token.type in self.SECTIONS:
                    if token.type in seen_sections:
                        self._record_syntax_error(token, f"'{token.value[:-1]}' already defined")

                    self.syntax_tree.attach_child(self._parse_section(token))
                    seen_sections.add(token.type)
                elif token.type == TokenType.END_OF_FILE:
                    if self.parse_errors:
                        raise ConfigParserError("parser error", self.parse_errors)

                    return self.syntax_tree
                else:
                    self._record_syntax_error(token, f"Unexpected token: {token.value} at top level")
        except FileNotFoundError as e:
            err_token = self.current_token
            self.parse_errors.append(ConfigSyntaxError(
                f"{e}", err_token.filename, err_token.line, err_token.column, err_token.input
            ))
            raise ConfigParserError("parser error", self.parse_errors) from e
        except ConfigParserFileAlreadyUsedError as e:
            self.parse_errors.append(ConfigSyntaxError(
                f"The file '{e.filename}' has already been used",
                e.token.filename,
                e.token.line,
                e.token.column,
                e.token.input
            ))
            raise ConfigParserError("parser error", self.parse_errors) from e

    def parse_file(self, filename: str, search_paths: List[str]) -> ConfigNode:
        """
        Parse a file and construct the configuration tree.

        Args:
            filename (str): The path to the file to be parsed.
            search_paths (List[str]): List of paths to search for included files.

        Returns:
            ConfigNode: The root of the tree.

        Raises:
            ConfigParserError: If there are syntax errors or the file cannot be read.
        """
        try:
            self._check_file_not_loaded(filename)
            input_text = self._read_file(filename)
            return self.parse(input_text, filename, search_paths)
        except FileNotFoundError as e:
            self.parse_errors.append(ConfigSyntaxError(
                f"{e}", "", 0, 0, ""
            ))
            raise ConfigParserError("parser error", self.parse_errors) from e

    def get_next_token(self) -> Token:
        """Get the next token from the active lexer."""
        while self.lexers:
            lexer = self.lexers[-1]
            token = lexer.get_next_token()
            self.current_token = token

            if token.type == TokenType.INCLUDE:
                self._parse_include(lexer.filename)
            elif token.type == TokenType.END_OF_FILE:
                self.lexers.pop()
            else:
                return token

        return Token(TokenType.END_OF_FILE, "", "", "", 0, 0)

    def _record_syntax_error(self, token: Token, message: str) -> None:
        error = ConfigSyntaxError(
            message, token.filename, token.line, token.column, token.input
        )
        self.parse_errors.append(error)

    def _find_file_path(self, filename: str, including_file: str) -> str:
        """Find an included file: absolute, then beside the including file, then on the search paths."""
        if os.path.isabs(filename):
            if Path(filename).exists():
                return filename

            raise FileNotFoundError(f"File not found: {filename}")

        candidates = [os.path.dirname(including_file)] + self.search_paths
        for path in candidates:
            try_name = os.path.join(path, filename)
            if Path(try_name).exists():
                return try_name

        raise FileNotFoundError(f"File not found: {filename}")

    def _read_file(self, filename: str) -> str:
        try:
            with open(filename, 'r', encoding='utf-8') as file:
                return file.read()
        except FileNotFoundError as e:
            raise FileNotFoundError(f"File not found: {filename}") from e
        except PermissionError as e:
            raise FileNotFoundError(f"You do not have permission to access: {filename}") from e
        except IsADirectoryError as e:
            raise FileNotFoundError(f"Is a directory: {filename}") from e
        except OSError as e:
            raise FileNotFoundError(f"OS error: {e}") from e

    def _check_file_not_loaded(self, filename: str) -> None:
        canonical_filename = os.path.realpath(filename)
        if canonical_filename in self.previously_seen_files:
            raise ConfigParserFileAlreadyUsedError(filename, self.current_token)

        self.previously_seen_files.add(canonical_filename)

    def _parse_entry(self, token: Token, seen_keys: Set[str]) -> Optional[ConfigNode]:
        """Parse a `key: value` line."""
        key, separator, value = token.value.partition(':')
        key = key.strip()
        value = value.strip()
        if not separator or not key:
            self._record_syntax_error(token, "Expected 'key: value' entry")
            return None

        if key in seen_keys:
            self._record_syntax_error(token, f"'{key}' already defined")

        seen_keys.add(key)
        return ConfigNode(ConfigNodeType.ENTRY, value, key, token.filename, token.line)

    def _parse_section(self, token: Token) -> ConfigNode:
        """Parse a section and its entries."""
        section_name = token.value[:-1]
        label_name = ""

        init_token = self.get_next_token()
        if init_token.type == TokenType.KEYWORD_TEXT:
            label_name = init_token.value
            indent_token = self.get_next_token()
            if indent_token.type != TokenType.INDENT:
                self._record_syntax_error(
                    token,
                    f"Expected indent after keyword description for '{section_name}' section"
                )
        elif init_token.type != TokenType.INDENT:
            self._record_syntax_error(token, f"Expected description or indent for '{section_name}' section")

        section_node = ConfigNode(self.SECTIONS[token.type], label_name, "", token.filename, token.line)
        seen_keys: Set[str] = set()

        while True:
            token = self.get_next_token()
            if token.type == TokenType.ENTRY:
                entry = self._parse_entry(token, seen_keys)
                if entry is not None:
                    section_node.attach_child(entry)
            elif token.type == TokenType.TAB:
                self._record_syntax_error(token, "Tab characters are not allowed; use spaces for indentation")
            elif token.type == TokenType.OUTDENT or token.type == TokenType.END_OF_FILE:
                return section_node
            else:
                self._record_syntax_error(
                    token,
                    f"Unexpected token: {token.value} in '{section_name}' section"
                )

    def _parse_include(self, including_file: str) -> None:
        """Parse an Include directive and load the included file."""
        token_next = self.get_next_token()
        if token_next.type != TokenType.KEYWORD_TEXT:
            self._record_syntax_error(token_next, "Expected file name for 'Include'")
            return

        try_file = self._find_file_path(token_next.value, including_file)
        self._check_file_not_loaded(try_file)
        input_text = self._read_file(try_file)
        self.lexers.append(ConfigLexer(input_text, try_file))
