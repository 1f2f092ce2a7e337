import json
import logging
import os
import sqlite3
from typing import Any, Dict, List, Optional

import pandas as pd

from src.core.config import STORE_PATH
from src.core.table import ScanTable


class ScanStore:
    """SQLite archive of emitted scan tables: one `runs` row per table, one `rows` row per data row."""

    def __init__(self, connection_string: str = STORE_PATH):
        self.connection_string = connection_string
        self.connection = None
        self.logger = logging.getLogger(__name__)

    def connect(self):
        """Establish a database connection"""
        try:
            folder = os.path.dirname(self.connection_string)
            if folder and self.connection_string != ":memory:":
                os.makedirs(folder, exist_ok=True)
            self.connection = sqlite3.connect(self.connection_string)
            self.connection.row_factory = sqlite3.Row
            self.logger.info(f"Connected to scan store: {self.connection_string}")
            self._create_tables()
        except (sqlite3.Error, OSError) as e:
            self.logger.error(f"Error connecting to scan store: {e}")
            raise

    def disconnect(self):
        """Close the database connection"""
        if self.connection:
            self.connection.close()
            self.connection = None
            self.logger.info("Scan store connection closed")

    def __enter__(self) -> "ScanStore":
        self.connect()
        return self

    def __exit__(self, *exc) -> None:
        self.disconnect()

    def _create_tables(self):
        try:
            cursor = self.connection.cursor()
            tables_sql = [
                """
                CREATE TABLE IF NOT EXISTS runs (
                    id INTEGER PRIMARY KEY AUTOINCREMENT,
                    subcommand TEXT NOT NULL,
                    columns TEXT NOT NULL,
                    units TEXT NOT NULL,
                    provenance TEXT NOT NULL,
                    created_at TIMESTAMP DEFAULT CURRENT_TIMESTAMP
                )
                """,
                """
                CREATE TABLE IF NOT EXISTS rows (
                    id INTEGER PRIMARY KEY AUTOINCREMENT,
                    run_id INTEGER NOT NULL,
                    row_index INTEGER NOT NULL,
                    [values] TEXT NOT NULL,
                    FOREIGN KEY (run_id) REFERENCES runs(id)
                )
                """,
            ]
            indexes_sql = [
                "CREATE INDEX IF NOT EXISTS idx_runs_subcommand ON runs(subcommand)",
                "CREATE INDEX IF NOT EXISTS idx_rows_run ON rows(run_id, row_index)",
            ]
            for sql in tables_sql + indexes_sql:
                cursor.execute(sql)
            self.connection.commit()
        except sqlite3.Error as e:
            self.logger.error(f"Error creating tables: {e}")
            raise

    def _require_connection(self):
        if not self.connection:
            raise ConnectionError("Scan store not connected")

    def save_table(self, table: ScanTable) -> int:
        """Insert a table in one transaction and return its run id."""
        self._require_connection()
        provenance = {k: str(v) for k, v in table.provenance.items()}
        try:
            cursor = self.connection.cursor()
            cursor.execute(
                "INSERT INTO runs (subcommand, columns, units, provenance) VALUES (?, ?, ?, ?)",
                (provenance.get("subcommand", ""), json.dumps(table.columns), json.dumps(table.units),
                 json.dumps(provenance)),
            )
            run_id = cursor.lastrowid
            cursor.executemany(
                "INSERT INTO rows (run_id, row_index, [values]) VALUES (?, ?, ?)",
                [(run_id, i, json.dumps([float(v) for v in row]))
                 for i, row in enumerate(table.frame.itertuples(index=False))],
            )
            self.connection.commit()
            self.logger.info(f"Stored run {run_id} with {len(table)} rows")
            return run_id
        except sqlite3.Error as e:
            self.logger.error(f"Error storing table: {e}")
            self.connection.rollback()
            raise

    def get_runs(self, subcommand: Optional[str] = None) -> List[Dict[str, Any]]:
        self._require_connection()
        try:
            cursor = self.connection.cursor()
            if subcommand:
                cursor.execute("SELECT * FROM runs WHERE subcommand = ? ORDER BY id", (subcommand,))
            else:
                cursor.execute("SELECT * FROM runs ORDER BY id")
            return [dict(row) for row in cursor.fetchall()]
        except sqlite3.Error as e:
            self.logger.error(f"Error fetching runs: {e}")
            raise

    def load_table(self, run_id: int) -> ScanTable:
        self._require_connection()
        try:
            cursor = self.connection.cursor()
            cursor.execute("SELECT * FROM runs WHERE id = ?", (run_id,))
            run = cursor.fetchone()
            if run is None:
                raise KeyError(f"no run with id {run_id}")
            cursor.execute("SELECT [values] FROM rows WHERE run_id = ? ORDER BY row_index", (run_id,))
            values = [json.loads(r[0]) for r in cursor.fetchall()]
        except sqlite3.Error as e:
            self.logger.error(f"Error loading run {run_id}: {e}")
            raise
        columns = json.loads(run["columns"])
        frame = pd.DataFrame(values, columns=columns, dtype=float)
        return ScanTable(frame, json.loads(run["units"]), json.loads(run["provenance"]))
