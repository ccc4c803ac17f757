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
"""
Tree representation of a parsed run-configuration document.
"""

from typing import Dict, List, Optional
from enum import IntEnum

class ConfigNodeType(IntEnum):
    """
    Types of nodes that can appear in a configuration tree.
    """
    ROOT: int = 0
    ENTRY: int = 1
    MODEL: int = 2
    REFRACTION: int = 3
    QUERY: int = 4
    MC: int = 5
    OUTPUT: int = 6


class ConfigNode:
    """
    Represents a node in the configuration tree.

    Section nodes carry the text written after their keyword (the model name for
    Model:) as their value; entry nodes carry a key and its raw value.

    Attributes:
        node_type (ConfigNodeType): The type of the node.
        key (str): The entry key; empty for sections and the root.
        value (str): The raw text value of the node.
        filename (str): The file the node was read from.
        line (int): The line the node was read from.
    """
    def __init__(self, node_type: ConfigNodeType, value: str, key: str = "", filename: str = "",
                 line: int = 0) -> None:
        self._node_type: ConfigNodeType = node_type
        self._key: str = key
        self._value: str = value
        self._filename: str = filename
        self._line: int = line
        self._parent: Optional['ConfigNode'] = None
        self._children: List['ConfigNode'] = []

    def __str__(self, indent: int = 0) -> str:
        indent_str = "    " * indent
        if self.node_type == ConfigNodeType.ENTRY:
            result = f"{indent_str}{self.key}: {self.value}"
        else:
            result = f"{indent_str}{self.node_type.name}: {self.value}"

        for child in self._children:
            result += "\n" + child.__str__(indent + 1)

        return result

    def __repr__(self) -> str:
        return f"{self.node_type.name}({self.key or self.value})[{len(self._children)}]"

    def attach_child(self, child: 'ConfigNode') -> None:
        """Add a child node to this ConfigNode."""
        child.parent = self
        self._children.append(child)

    @property
    def node_type(self) -> ConfigNodeType:
        """The type of this node."""
        return self._node_type

    @property
    def key(self) -> str:
        return self._key

    @property
    def value(self) -> str:
        """The raw text value of this node."""
        return self._value

    @property
    def filename(self) -> str:
        return self._filename

    @property
    def line(self) -> int:
        return self._line

    @property
    def parent(self) -> Optional['ConfigNode']:
        """The parent node, if any."""
        return self._parent

    @parent.setter
    def parent(self, new_parent: Optional['ConfigNode']) -> None:
        self._parent = new_parent

    @property
    def children(self) -> List['ConfigNode']:
        """The node's children (returns a shallow copy to prevent direct list modification)."""
        return self._children.copy()

    def get_children_of_type(self, node_type: ConfigNodeType) -> List['ConfigNode']:
        """
        Returns a list of all immediate children that match the specified node type.

        Args:
            node_type (ConfigNodeType): The type of nodes to filter for

        Returns:
            List[ConfigNode]: List of child nodes matching the specified type
        """
        return [child for child in self._children if child.node_type == node_type]

    def section(self, node_type: ConfigNodeType) -> Optional['ConfigNode']:
        """Return the first child section of the given type, if any."""
        matches = self.get_children_of_type(node_type)
        return matches[0] if matches else None

    def entries(self) -> Dict[str, str]:
        """Return the entries of a section as a key to raw value mapping."""
        return {child.key: child.value for child in self.get_children_of_type(ConfigNodeType.ENTRY)}
