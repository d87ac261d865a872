#!/usr/bin/env python3

import csv
import json
import os
from typing import Any, Dict, Iterable, List, Sequence

# File names inside a run directory
GRAPH_FILE = "graph.txt"
SCHEDULE_FILE = "schedule.json"
BUILD_TRANSCRIPT_FILE = "build_transcript.jsonl"
SIM_TRANSCRIPT_FILE = "sim_transcript.jsonl"
SUMMARY_FILE = "summary.json"
REPORT_FILE = "verify_report.json"
BENCH_FILE = "bench.csv"


def edge_file_name(mode: str) -> str:
    """emulator.txt or spanner.txt"""
    return f"{mode}.txt"


def ensure_out_dir(path: str) -> str:
    """Ensure the output directory exists"""
    os.makedirs(path, exist_ok=True)
    return path


def write_text(directory: str, name: str, text: str) -> str:
    path = os.path.join(ensure_out_dir(directory), name)
    with open(path, "w") as f:
        f.write(text)
    return path


def write_json(directory: str, name: str, data: Dict[str, Any]) -> str:
    path = os.path.join(ensure_out_dir(directory), name)
    with open(path, "w") as f:
        json.dump(data, f, indent=2, sort_keys=True)
        f.write("\n")
    return path


def write_lines(directory: str, name: str, lines: Iterable[str]) -> str:
    path = os.path.join(ensure_out_dir(directory), name)
    with open(path, "w") as f:
        for line in lines:
            f.write(line)
            f.write("\n")
    return path


def write_csv(directory: str, name: str, columns: Sequence[str], rows: List[Dict[str, Any]]) -> str:
    path = os.path.join(ensure_out_dir(directory), name)
    with open(path, "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=list(columns))
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
    return path


def read_json(path: str) -> Dict[str, Any]:
    try:
        with open(path, "r") as f:
            return json.load(f)
    except FileNotFoundError:
        raise FileNotFoundError(f"File not found at: {path}")


def read_text(path: str) -> str:
    try:
        with open(path, "r") as f:
            return f.read()
    except FileNotFoundError:
        raise FileNotFoundError(f"File not found at: {path}")
