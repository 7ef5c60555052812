"""Two-way object table and deterministic ID assignment."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import InputError
from .nodes import YulObject


@dataclass
class ObjectTable:
    by_name: dict[str, YulObject] = field(default_factory=dict)
    by_id: dict[int, YulObject] = field(default_factory=dict)
    # data segments get synthetic IDs so dataoffset/datacopy work uniformly
    data_ids: dict[tuple[str, str], int] = field(default_factory=dict)
    data_by_id: dict[int, bytes] = field(default_factory=dict)

    def object_for_id(self, object_id: int) -> YulObject | None:
        return self.by_id.get(object_id)

    def data_for_id(self, object_id: int) -> bytes | None:
        return self.data_by_id.get(object_id)

    def resolve_data_name(self, owner: YulObject, name: str) -> tuple[int, int] | None:
        """(id, byte length) of a data segment named relative to ``owner``."""
        for obj in owner.walk():
            for seg_name, payload in obj.data_segments:
                if seg_name == name:
                    return self.data_ids[(obj.name, seg_name)], len(payload)
        return None


def index_objects(root: YulObject, oracle) -> ObjectTable:
    """Assign stable nonzero IDs (keccak-oracle hash of each name) and index.

    IDs are a pure function of object names, so they survive subobject
    reordering and are identical across runs with the same oracle seed.
    """
    table = ObjectTable()
    for obj in root.walk():
        if obj.name in table.by_name:
            raise InputError(f"duplicate object name: {obj.name!r}")
        obj.object_id = oracle.digest(b"object:" + obj.name.encode("utf-8"))
        table.by_name[obj.name] = obj
        table.by_id[obj.object_id] = obj
        for seg_name, payload in obj.data_segments:
            seg_id = oracle.digest(
                b"data:" + obj.name.encode("utf-8") + b"\x00" + seg_name.encode("utf-8")
            )
            table.data_ids[(obj.name, seg_name)] = seg_id
            table.data_by_id[seg_id] = payload
    return table
