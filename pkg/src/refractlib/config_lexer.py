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
from typing import Dict, List, Final

from .config_token import Token, TokenType

class ConfigLexer:
    """
    Lexer for run-configuration documents.

    A document consists of:
    - Section keywords (Model:, Refraction:, Query:, Mc:, Output:) with optional text after them
    - Include directives
    - Indented `key: value` entries

    Lines starting with '#' are comments and blank lines are ignored.
    """

    INDENT_SPACES = 4

    KEYWORDS: Final[Dict[str, TokenType]] = {
        "Include:": TokenType.INCLUDE,
        "Mc:": TokenType.MC,
        "Model:": TokenType.MODEL,
        "Output:": TokenType.OUTPUT,
        "Query:": TokenType.QUERY,
        "Refraction:": TokenType.REFRACTION
    }

    def __init__(self, input_text: str, filename: str) -> None:
        """
        Initialize the ConfigLexer.

        Args:
            input_text (str): The text content to be lexically analyzed
            filename (str): Name of the file being processed
        """
        self.indent_column: int = 1
        self.filename: str = filename
        self.tokens: List[Token] = []
        self.current_line: int = 1
        self.input: str = input_text
        self._tokenize()

    def get_next_token(self) -> Token:
        """Return the next token from the token list."""
        if self.tokens:
            return self.tokens.pop(0)

        return Token(TokenType.END_OF_FILE, "", "", self.filename, self.current_line, 1)

    def _tokenize(self) -> None:
        if not self.input:
            return

        for line in self.input.splitlines():
            self._process_line(line)
            self.current_line += 1

        self._handle_final_outdents()

    def _handle_final_outdents(self) -> None:
        while self.indent_column > 1:
            self._append(TokenType.OUTDENT, "[Outdent]", "", self.indent_column)
            self.indent_column -= self.INDENT_SPACES

    def _append(self, token_type: TokenType, value: str, line: str, column: int) -> None:
        self.tokens.append(
            Token(
                type=token_type,
                value=value,
                input=line,
                filename=self.filename,
                line=self.current_line,
                column=column
            )
        )

    def _process_line(self, line: str) -> None:
        """
        Process a single line of input.

        Args:
            line: The line to process
        """
        stripped_line = line.lstrip(' ')
        start_column = len(line) - len(stripped_line) + 1

        if not stripped_line.strip() or stripped_line.startswith('#'):
            return

        if stripped_line.startswith('\t'):
            self._append(TokenType.TAB, "[Tab]", line, start_column)
            stripped_line = stripped_line.lstrip('\t')
            if not stripped_line.strip():
                return

        words = stripped_line.split(maxsplit=1)
        first_word = words[0].capitalize()
        if first_word in self.KEYWORDS:
            self._process_indentation(line, start_column)
            self._append(self.KEYWORDS[first_word], first_word, line, start_column)
            if len(words) > 1:
                self._append(TokenType.KEYWORD_TEXT, words[1].strip(), line, start_column + len(first_word) + 1)

            return

        self._process_indentation(line, start_column)
        self._append(TokenType.ENTRY, stripped_line.strip(), line, start_column)

    def _process_indentation(self, line: str, start_column: int) -> None:
        indent_offset = start_column - self.indent_column

        if indent_offset > 0:
            self._handle_indent(line, start_column, indent_offset)
        elif indent_offset < 0:
            self._handle_outdent(line, start_column, indent_offset)

    def _handle_indent(self, line: str, start_column: int, indent_offset: int) -> None:
        if indent_offset % self.INDENT_SPACES != 0:
            self._append(TokenType.BAD_INDENT, "[Bad Indent]", line, start_column)
            return

        while indent_offset > 0:
            self._append(TokenType.INDENT, "[Indent]", line, start_column)
            indent_offset -= self.INDENT_SPACES

        self.indent_column = start_column

    def _handle_outdent(self, line: str, start_column: int, indent_offset: int) -> None:
        if abs(indent_offset) % self.INDENT_SPACES != 0:
            self._append(TokenType.BAD_OUTDENT, "[Bad Outdent]", line, start_column)
            return

        while indent_offset < 0:
            self._append(TokenType.OUTDENT, "[Outdent]", line, start_column)
            indent_offset += self.INDENT_SPACES

        self.indent_column = start_column
