"""Utilities for experiments"""
import csv
import json
import socket
from datetime import datetime
from pathlib import Path
import git
import numpy as np

SERIES_TAIL = ["xn", "t", "component", "value", "error"]


def experiment_info(config, argv=None, misc=None):
    """Run metadata, kept apart from the deterministic report"""
    try:
        repo = git.Repo(search_parent_directories=True)
        git_info = {
            "branch": repo.active_branch.name,
            "commit_hash": repo.head.object.hexsha
        }
    except (git.InvalidGitRepositoryError, git.NoSuchPathError, TypeError,
            ValueError):
        git_info = None
    return {
        "date": datetime.today().strftime("%Y-%m-%d %H:%M:%S"),
        "git": git_info,
        "host": socket.gethostname(),
        "config": config.info(),
        "argv": list(argv) if argv is not None else None,
        "misc": misc
    }


def series_header(dim):
    return ["x{}".format(k) for k in range(1, dim)] + SERIES_TAIL


def _cell(value):
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit_series(path, samples, dim):
    """Write FieldSamples as CSV rows, floats in repr form

    An empty sequence writes the header only.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as csv_file:
        writer = csv.writer(csv_file, lineterminator="\n")
        writer.writerow(series_header(dim))
        for sample in samples:
            writer.writerow([_cell(value) for value in sample.row()])
    return path


def _parse_component(text):
    try:
        return int(text)
    except ValueError:
        return text


def read_series(path):
    """Rows of a series file as dicts, coordinates and values as floats"""
    with Path(path).open("r", encoding="utf-8", newline="") as csv_file:
        reader = csv.reader(csv_file)
        header = next(reader)
        rows = []
        for record in reader:
            row = dict(zip(header, record))
            for key in header:
                if key == "component":
                    row[key] = _parse_component(row[key])
                else:
                    row[key] = float(row[key])
            rows.append(row)
    return rows


def _json_default(value):
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, Path):
        return str(value)
    raise TypeError("Not serializable: {}".format(type(value).__name__))


def write_json(path, document):
    """Sorted keys and fixed indentation, identical input gives identical bytes"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="\n") as json_file:
        json.dump(document,
                  json_file,
                  indent=2,
                  sort_keys=True,
                  default=_json_default)
        json_file.write("\n")
    return path
