from .report import to_json, write_csv, write_json

__all__ = ["to_json", "write_csv", "write_json"]
