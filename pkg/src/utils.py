import os
import json
import logging
from typing import Union, Dict, Any, List, Optional

import numpy as np
import pandas as pd

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def get_logger(name: str, level: int = logging.INFO) -> logging.Logger:
    """
    Returns a module logger. The root handler is configured once per process.

    Args:
        name (str): Logger name, usually ``__name__``.
        level (int, optional): Level for the root handler on first call.

    Returns:
        logging.Logger: The named logger.
    """
    root = logging.getLogger()
    if not root.handlers:
        logging.basicConfig(level=level, format=LOG_FORMAT)
    return logging.getLogger(name)


def read_json_as_dict(input_path: str) -> Dict:
    """
    Reads a JSON file and returns its content as a dictionary.
    If input_path is a directory, the first JSON file (sorted by name) is read.

    Args:
        input_path (str): The path to the JSON file or to a directory holding one.

    Returns:
        dict: The content of the JSON file.

    Raises:
        ValueError: If input_path is neither a file nor a directory,
                    or if it is a directory without any JSON file.
    """
    if os.path.isdir(input_path):
        json_files = sorted(f for f in os.listdir(input_path) if f.endswith(".json"))
        if not json_files:
            raise ValueError(f"No JSON files found in directory {input_path}")
        json_file_path = os.path.join(input_path, json_files[0])
    elif os.path.isfile(input_path):
        json_file_path = input_path
    else:
        raise ValueError(f"Input path is neither a file nor a directory: {input_path}")

    with open(json_file_path, "r", encoding="utf-8") as file:
        return json.load(file)


def spawn_generators(seed: int, count: int) -> List[np.random.Generator]:
    """
    Expands one 64-bit seed into ``count`` independent generators.

    Stream i is ``default_rng(SeedSequence(seed).spawn(count)[i])``, so trial i
    always receives the same stream for a given seed, whatever the worker layout.

    Args:
        seed (int): Non-negative integer seed.
        count (int): Number of streams.

    Returns:
        List[np.random.Generator]: One generator per trial.
    """
    if not isinstance(seed, (int, np.integer)) or seed < 0:
        raise ValueError(f"Invalid seed value: {seed}. Cannot spawn streams.")
    children = np.random.SeedSequence(int(seed)).spawn(count)
    return [np.random.default_rng(child) for child in children]


def save_dataframe_as_csv(
    dataframe: pd.DataFrame,
    file_path: str,
    header_lines: Optional[Dict[str, Any]] = None,
) -> None:
    """
    Saves a dataframe as CSV with floats in scientific notation (9 significant digits).

    Args:
        dataframe (pd.DataFrame): The table to save.
        file_path (str): Destination file path.
        header_lines (dict, optional): Written as ``# key: value`` lines above
            the column header, in the given order.

    Raises:
        IOError: If an error occurs while saving the CSV file.
    """
    try:
        with open(file_path, "w", encoding="utf-8", newline="") as file:
            for key, value in (header_lines or {}).items():
                file.write(f"# {key}: {value}\n")
            dataframe.to_csv(file, index=False, float_format="%.9e")
    except IOError as exc:
        raise IOError(f"Error saving CSV file {file_path}: {exc}") from exc


def read_csv_with_header(file_path: str) -> pd.DataFrame:
    """Reads a CSV written by ``save_dataframe_as_csv``, skipping ``#`` lines."""
    if not os.path.isfile(file_path):
        raise FileNotFoundError(f"CSV file does not exist: {file_path}")
    return pd.read_csv(file_path, comment="#")


def save_json(file_path_and_name: str, data: Any) -> None:
    """Save json to a path (directory + filename)"""
    with open(file_path_and_name, "w", encoding="utf-8") as file:
        json.dump(
            data,
            file,
            default=make_serializable,
            sort_keys=True,
            indent=4,
            separators=(",", ": "),
        )


def make_serializable(obj: Any) -> Union[int, float, bool, List[Any], Any]:
    """
    Converts numpy scalars and arrays into JSON-native types.

    Args:
        obj: Any Python object.

    Returns:
        int, float, bool or list for numpy values; otherwise defers to
        ``json.JSONEncoder.default`` (which raises TypeError).
    """
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return json.JSONEncoder.default(None, obj)
