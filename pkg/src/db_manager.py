# db_manager.py
import os, sqlite3, json, time, shutil
from typing import Optional

from src.config import DEFAULT_CONFIG
from src.utils import compose_run_dir


class DBManager:
    """
    SQLite registry of simulation runs.

    Key features:
      - Registers runs, creating ./out/{name}_{id}/ unless a directory is given.
      - Stores the resolved run configuration and the analysis results per run.
      - Deletes a run's directory together with its database entries.
      - Uses paths relative to the working directory so the registry can move
        with the project.
    """
    def __init__(self, db_path: str = DEFAULT_CONFIG["run"]["registry_path"]):
        db_abs_path = db_path if os.path.isabs(db_path) else os.path.join(os.getcwd(), db_path)
        db_dir = os.path.dirname(db_abs_path)
        if db_dir and not os.path.exists(db_dir):
            os.makedirs(db_dir, exist_ok=True)

        self.conn = sqlite3.connect(db_abs_path, check_same_thread=False)
        self.conn.execute("PRAGMA foreign_keys = ON")
        self.conn.row_factory = sqlite3.Row
        self._create_tables()

    def _create_tables(self):
        cur = self.conn.cursor()
        cur.executescript(
            """
            CREATE TABLE IF NOT EXISTS runs(
                id INTEGER PRIMARY KEY,
                name TEXT NOT NULL,
                engine TEXT NOT NULL,
                dir_path TEXT NOT NULL UNIQUE,
                created_at TEXT NOT NULL
            );
            CREATE TABLE IF NOT EXISTS run_configs(
                run_id INTEGER PRIMARY KEY,
                config_json TEXT NOT NULL,
                FOREIGN KEY(run_id) REFERENCES runs(id) ON DELETE CASCADE
            );
            CREATE TABLE IF NOT EXISTS run_results(
                run_id INTEGER PRIMARY KEY,
                results_json TEXT NOT NULL,
                FOREIGN KEY(run_id) REFERENCES runs(id) ON DELETE CASCADE
            );
            """
        )
        self.conn.commit()

    def close(self):
        self.conn.close()

    # Internal path utilities
    def _rel(self, path: str) -> str:
        if os.path.isabs(path):
            try:
                return os.path.relpath(path, os.getcwd())
            except ValueError:
                # different drive on Windows
                return path
        return path

    def _abs(self, rel_path: str) -> str:
        if not rel_path:
            return ""
        if os.path.isabs(rel_path):
            return rel_path
        return os.path.abspath(os.path.join(os.getcwd(), rel_path))

    def _new_id(self) -> int:
        """Millisecond timestamp, bumped past any id already taken."""
        ts_ms = int(time.time() * 1000)
        cur = self.conn.cursor()
        cur.execute("SELECT MAX(id) AS last FROM runs")
        row = cur.fetchone()
        if row and row["last"] is not None and row["last"] >= ts_ms:
            ts_ms = row["last"] + 1
        return ts_ms

    # Registration and basic info
    def register_run(self, name: str, engine: str, dir_path: Optional[str] = None,
                     out_root: str = DEFAULT_CONFIG["run"]["out_dir"]) -> int:
        """
        Registers a run and returns its id.

        The id is a millisecond timestamp and doubles as the suffix of the
        auto-generated directory {out_root}/{name}_{id}/. A dir_path that is
        already registered returns the existing id unchanged.
        """
        cur = self.conn.cursor()
        if dir_path:
            rel_path = self._rel(dir_path)
            cur.execute("SELECT id FROM runs WHERE dir_path = ?", (rel_path,))
            row = cur.fetchone()
            if row:
                return row["id"]
            run_id = self._new_id()
        else:
            run_id = self._new_id()
            rel_path = self._rel(compose_run_dir(name, run_id, out_root))
        os.makedirs(self._abs(rel_path), exist_ok=True)

        cur.execute(
            "INSERT INTO runs(id, name, engine, dir_path, created_at) "
            "VALUES(?,?,?,?,datetime('now'))",
            (run_id, name, engine, rel_path)
        )
        self.conn.commit()
        return run_id

    def get_run_id_by_dir(self, dir_path: str) -> Optional[int]:
        cur = self.conn.cursor()
        cur.execute("SELECT id FROM runs WHERE dir_path = ?", (self._rel(dir_path),))
        row = cur.fetchone()
        return row["id"] if row else None

    def get_run_basic_info(self, run_id: int) -> Optional[dict]:
        """name, engine and dir_path of a run (dir_path as stored, relative)."""
        cur = self.conn.cursor()
        cur.execute("SELECT name, engine, dir_path FROM runs WHERE id = ?", (run_id,))
        row = cur.fetchone()
        return dict(row) if row else None

    def get_run_dir(self, run_id: int) -> str:
        info = self.get_run_basic_info(run_id)
        return self._abs(info["dir_path"]) if info else ""

    # Configs and results
    def save_run_config(self, run_id: int, cfg: dict):
        cur = self.conn.cursor()
        cur.execute(
            "INSERT INTO run_configs(run_id, config_json) "
            "VALUES(?,?) "
            "ON CONFLICT(run_id) DO UPDATE SET config_json=excluded.config_json",
            (run_id, json.dumps(cfg, ensure_ascii=False, indent=2))
        )
        self.conn.commit()

    def save_run_results(self, run_id: int, results: dict):
        cur = self.conn.cursor()
        cur.execute(
            "INSERT INTO run_results(run_id, results_json) "
            "VALUES(?,?) "
            "ON CONFLICT(run_id) DO UPDATE SET results_json=excluded.results_json",
            (run_id, json.dumps(results, ensure_ascii=False, indent=2))
        )
        self.conn.commit()

    def get_run_config(self, run_id: int) -> Optional[dict]:
        cur = self.conn.cursor()
        cur.execute("SELECT config_json FROM run_configs WHERE run_id = ?", (run_id,))
        row = cur.fetchone()
        return json.loads(row["config_json"]) if row else None

    def get_run_results(self, run_id: int) -> Optional[dict]:
        cur = self.conn.cursor()
        cur.execute("SELECT results_json FROM run_results WHERE run_id = ?", (run_id,))
        row = cur.fetchone()
        return json.loads(row["results_json"]) if row else None

    # Delete run (directory and database entries)
    def delete_run(self, run_id: int, remove_files: bool = True):
        """
        Deletes the run record; configs and results go with it through
        ON DELETE CASCADE. The output directory is removed unless remove_files
        is False.
        """
        info = self.get_run_basic_info(run_id)
        if remove_files and info and info["dir_path"]:
            run_dir = self._abs(info["dir_path"])
            if os.path.exists(run_dir):
                shutil.rmtree(run_dir, ignore_errors=True)
        self.conn.execute("DELETE FROM runs WHERE id = ?", (run_id,))
        self.conn.commit()

    def get_all_runs(self, engine: Optional[str] = None) -> list[dict]:
        """id, name and engine of every run, most recent first."""
        cur = self.conn.cursor()
        if engine:
            cur.execute("SELECT id, name, engine FROM runs WHERE engine = ? ORDER BY id DESC", (engine,))
        else:
            cur.execute("SELECT id, name, engine FROM runs ORDER BY id DESC")
        return [dict(row) for row in cur.fetchall()]
