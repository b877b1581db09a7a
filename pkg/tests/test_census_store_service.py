from __future__ import annotations

import unittest

from sqlalchemy import create_engine, inspect
from sqlalchemy.orm import Session, sessionmaker

from app.core.exceptions import AppException
from app.db.base import Base
from app.db.models import CensusEntry, CensusRun
from app.db.session import engine_kwargs
from app.schemas.census import CensusConfig
from app.services import census_service, census_store_service


class CensusStoreTests(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.report = census_service.run_census(CensusConfig(min_strands=2, max_strands=2, max_length=3, depth=2))

    def setUp(self):
        self.engine = create_engine("sqlite://", **engine_kwargs("sqlite://"))
        Base.metadata.create_all(bind=self.engine)
        self.SessionLocal = sessionmaker(bind=self.engine, class_=Session, autoflush=False, autocommit=False)
        self.db = self.SessionLocal()

    def tearDown(self):
        self.db.close()
        self.engine.dispose()

    def test_saved_run_renders_the_same_report(self):
        run = census_store_service.save_report(self.db, self.report)
        self.assertEqual(run.word_count, 15)
        self.assertEqual(run.class_count, 6)
        self.assertEqual(len(run.entries), 15)
        self.assertEqual(run.digest, census_store_service.report_digest(self.report))

        loaded = census_store_service.load_report(self.db, run.id)
        self.assertEqual(census_service.format_report(loaded), census_service.format_report(self.report))
        self.assertEqual(
            census_service.format_report(loaded, "records"),
            census_service.format_report(self.report, "records"),
        )

    def test_tables_follow_the_naming_convention(self):
        indexes = {index["name"] for index in inspect(self.engine).get_indexes("census_entries")}
        self.assertTrue({"ix_census_entries_run_id", "ix_census_entries_fingerprint_hash"} <= indexes)
        run = census_store_service.save_report(self.db, self.report)
        self.assertEqual(len(run.id), 36)
        self.assertEqual(len({entry.id for entry in run.entries}), len(run.entries))

    def test_entries_keep_enumeration_order(self):
        run = census_store_service.save_report(self.db, self.report)
        self.db.expire_all()
        stored = self.db.get(CensusRun, run.id)
        self.assertEqual([entry.position for entry in stored.entries], list(range(15)))
        self.assertEqual(stored.entries[0].word, "B2:")

    def test_list_runs(self):
        census_store_service.save_report(self.db, self.report)
        census_store_service.save_report(self.db, self.report)
        runs = census_store_service.list_runs(self.db, limit=1)
        self.assertEqual(len(runs), 1)
        self.assertEqual(runs[0]["classCount"], 6)
        self.assertEqual(len(census_store_service.list_runs(self.db)), 2)

    def test_missing_run(self):
        with self.assertRaises(AppException) as ctx:
            census_store_service.load_report(self.db, "no-such-run")
        self.assertEqual(ctx.exception.code, "census.run_not_found")
        self.assertEqual(ctx.exception.status_code, 404)

    def test_tampered_run_is_detected(self):
        run = census_store_service.save_report(self.db, self.report)
        entry = self.db.query(CensusEntry).filter(CensusEntry.run_id == run.id, CensusEntry.position == 1).one()
        record = self.report.records[1].model_copy(update={"class_id": 99})
        entry.record_json = record.model_dump_json()
        self.db.commit()
        with self.assertRaises(AppException) as ctx:
            census_store_service.load_report(self.db, run.id)
        self.assertEqual(ctx.exception.code, "census.digest_mismatch")


if __name__ == "__main__":
    unittest.main()
