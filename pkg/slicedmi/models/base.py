"""
Base record type for configuration and result objects.

Records are dataclasses that serialize to plain dictionaries; parsing a
dictionary rejects keys the record does not declare.
"""
import dataclasses
from typing import Any, Dict, Type, TypeVar

from slicedmi.exceptions import ConfigError, SmiError

T = TypeVar('T', bound='BaseRecord')


class BaseRecord:
    """Mixin for dataclass records with strict dictionary parsing"""

    # Fields holding nested records, mapped to their record type
    nested: Dict[str, Type['BaseRecord']] = {}

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary"""
        data = {}
        for field in dataclasses.fields(self):
            value = getattr(self, field.name)
            if hasattr(value, 'to_dict'):
                value = value.to_dict()
            elif isinstance(value, tuple):
                value = list(value)
            data[field.name] = value
        return data

    @classmethod
    def from_dict(cls: Type[T], data: Dict[str, Any]) -> T:
        """Create from dictionary, rejecting unknown keys"""
        if data is None:
            data = {}
        if not isinstance(data, dict):
            raise ConfigError(f"{cls.__name__} expects a mapping, got {type(data).__name__}")

        known = {field.name for field in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"Unknown keys for {cls.__name__}: {', '.join(unknown)}",
                              allowed=sorted(known))

        kwargs = {}
        for key, value in data.items():
            record_type = cls.nested.get(key)
            if record_type is not None and isinstance(value, dict):
                value = record_type.from_dict(value)
            kwargs[key] = value
        try:
            record = cls(**kwargs)
        except (TypeError, ValueError) as e:
            if isinstance(e, SmiError):
                raise
            raise ConfigError(f"Invalid {cls.__name__}: {e}") from e
        return record
