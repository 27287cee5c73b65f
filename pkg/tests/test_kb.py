"""Knowledge base: storage, episodic recording, advancement, persistence."""

import dataclasses

import pytest

from rrlang import dsl, interpreter as itp, ir, kb as kbmod, redescription as rd, tasks

Level = ir.Level


def four_apple_world():
    entities = {
        "ME": ("Person", None),
        "HAND": ("Hand", None),
        "ROOM1": ("Room", None),
        "TABLE1": ("Table", None),
    }
    ids = tuple(f"APPLE{i}" for i in range(1, 5))
    for eid in ids:
        entities[eid] = ("Apple", "apples")
    return itp.World(entities, {"apples": "Line"}, {"apples": ids}, 0)


def fresh_kb_with_episode():
    """A kb holding the training recording plus one fresh 4-apple episode."""
    kb = kbmod.KnowledgeBase()
    instance = dsl.load_fixture("counting_apples_i")[0]
    kb.add_unit(instance)
    world = four_apple_world()
    replayed = replay_four_apples(instance)
    kb.record_instance(replayed, world, "apples")
    return kb


def replay_four_apples(template):
    events = []
    seq = 0
    for i, numeral in enumerate(ir.NUMERALS[:4], start=1):
        for verb, arg in (("Moved", None), ("PointedTo", f"APPLE{i}"), ("Said", numeral)):
            seq += 1
            events.append(itp.TraceEvent(seq, verb, arg))
    events.append(itp.TraceEvent(seq + 1, "Said", ir.NUMERALS[3]))
    return tuple(events)


class TestStore:
    def test_canonical_holds_the_reference_concepts(self, canonical_kb):
        assert len(canonical_kb) == 7
        assert canonical_kb.validate() == []
        names = {u.name for u in canonical_kb}
        assert {"CountingApples", "Counting", "OrdinalNumber", "Set", "Globals"} <= names

    def test_task_apparatus_is_not_knowledge(self, canonical_kb):
        names = {u.name for u in canonical_kb}
        assert not names & {"FetchErrand", "BusBoarding", "NumberConservation"}

    def test_unit_lookup_prefers_the_most_redescribed(self, canonical_kb):
        assert canonical_kb.unit("Counting").level is Level.E3
        assert canonical_kb.unit("Counting", Level.E2).level is Level.E2
        assert canonical_kb.unit("Missing") is None

    def test_domains_exclude_shared_data(self, canonical_kb):
        domains = canonical_kb.domains()
        assert domains == tuple(sorted(domains))
        assert "apples" in domains and "numbers" in domains

    def test_level_slices_carry_globals_upward(self, canonical_kb):
        slices = canonical_kb.kb_by_level()
        for level in (Level.I, Level.E1):
            assert all(u.name != ir.GLOBALS_UNIT for u in slices[level])
        for level in (Level.E2, Level.E3):
            assert any(u.name == ir.GLOBALS_UNIT for u in slices[level])

    def test_duplicate_units_are_rejected(self, canonical_kb):
        with pytest.raises(kbmod.DuplicateUnit):
            canonical_kb.add_unit(dsl.load_fixture("counting_e2")[0])

    def test_invalid_units_are_rejected(self):
        kb = kbmod.KnowledgeBase()
        e1 = dsl.load_fixture("counting_apples_e1")[0]
        op = e1.operation("Counting")
        loud = dataclasses.replace(op, visibility=ir.Visibility.PUBLIC)
        ops = tuple(loud if o.name == op.name else o for o in e1.operations)
        with pytest.raises(kbmod.InvalidUnit):
            kb.add_unit(dataclasses.replace(e1, operations=ops))


class TestRecording:
    def test_recorded_episode_matches_the_reference_shape(self):
        kb = kbmod.KnowledgeBase()
        instance = dsl.load_fixture("counting_apples_i")[0]
        world = tasks.training_world()
        res = itp.replay_instance([instance], instance, world)
        recorded = kb.record_instance(res.trace, world, "apples")
        assert recorded.name == "Counting_apples_1"
        assert recorded.level is Level.I
        assert ir.units_equal(recorded, instance, ignore_names=True)

    def test_ordinals_count_existing_recordings(self):
        kb = kbmod.KnowledgeBase.canonical()
        world = tasks.training_world()
        instance = kb.unit("CountingApples", Level.I)
        res = itp.replay_instance([instance], instance, world)
        recorded = kb.record_instance(res.trace, world, "apples")
        assert recorded.name == "Counting_apples_2"

    def test_recording_then_replaying_is_a_fixpoint(self):
        kb = kbmod.KnowledgeBase()
        instance = dsl.load_fixture("counting_apples_i")[0]
        world = tasks.training_world()
        first = kb.record_instance(
            itp.replay_instance([instance], instance, world).trace, world, "apples"
        )
        second = kb.record_instance(
            itp.replay_instance([first], first, world).trace, world, "apples"
        )
        assert ir.units_equal(first, second, ignore_names=True)

    def test_empty_trace_is_no_episode(self):
        kb = kbmod.KnowledgeBase()
        with pytest.raises(kbmod.EmptyTrace):
            kb.record_instance((), tasks.training_world(), "apples")

    def test_outcome_log_ticks_monotonically(self):
        kb = kbmod.KnowledgeBase()
        kb.record_outcome("CountingApples", "T1", tasks.Outcome.solved())
        kb.record_outcome("CountingApples", "T2", "Failed")
        assert [e.tick for e in kb.log] == [1, 2]
        assert kb.log[0].outcome == "Solved"
        assert kb.log[1].outcome == "Failed"


def push_to_mastery(kb, unit_name):
    for task_id in ("T1", "T2", "T3"):
        kb.record_outcome(unit_name, task_id, "Solved")


class TestAdvance:
    def test_ladder_fires_one_phase_per_call(self):
        kb = fresh_kb_with_episode()
        push_to_mastery(kb, "CountingApples")

        first = kb.advance()
        assert [r.phase for r in first] == [1]
        assert kb.unit("CountingApples", Level.E1) is not None

        push_to_mastery(kb, "CountingApples")
        second = kb.advance()
        assert [r.phase for r in second] == [2]
        assert kb.unit("Counting", Level.E2) is not None
        assert kb.globals_unit is not None

        push_to_mastery(kb, "Counting")
        third = kb.advance()
        assert [r.phase for r in third] == [3]
        assert kb.unit("Counting", Level.E3) is not None
        assert kb.unit("Set", Level.E3) is not None
        assert kb.unit("OrdinalNumber", Level.E3) is not None

        push_to_mastery(kb, "Counting")
        assert kb.advance() == []

    def test_without_mastery_nothing_moves(self):
        kb = fresh_kb_with_episode()
        kb.record_outcome("CountingApples", "T1", "Solved")
        kb.record_outcome("CountingApples", "T2", "Failed")
        assert kb.advance() == []

    def test_threshold_is_respected(self):
        kb = fresh_kb_with_episode()
        push_to_mastery(kb, "CountingApples")
        assert kb.advance(threshold=5) == []
        assert kb.advance(threshold=3) != []

    def test_single_episode_cannot_generalize(self):
        kb = kbmod.KnowledgeBase()
        kb.add_unit(dsl.load_fixture("counting_apples_i")[0])
        push_to_mastery(kb, "CountingApples")
        assert kb.advance() == []

    def test_experience_is_retained_through_the_chain(self):
        kb = fresh_kb_with_episode()
        for _ in range(3):
            push_to_mastery(kb, "CountingApples")
            push_to_mastery(kb, "Counting")
            kb.advance()
        instances = [u for u in kb.units_at(Level.I)]
        assert len(instances) == 2
        res = itp.replay_instance(instances, instances[0], tasks.training_world())
        assert [e.arg for e in res.trace if e.verb == "Said"] == [
            "ONE", "TWO", "THREE", "THREE",
        ]

    def test_grown_kb_reaches_the_reference_capability(self):
        kb = fresh_kb_with_episode()
        for _ in range(3):
            push_to_mastery(kb, "CountingApples")
            push_to_mastery(kb, "Counting")
            kb.advance()
        from rrlang import capability as cap

        assert cap.compare_expected(cap.build_matrix(kb.kb_by_level())) == []

    def test_generated_units_match_fixtures_byte_for_byte(self):
        kb = fresh_kb_with_episode()
        for _ in range(3):
            push_to_mastery(kb, "CountingApples")
            push_to_mastery(kb, "Counting")
            kb.advance()
        e2 = kb.unit("Counting", Level.E2)
        assert dsl.print_canonical([e2]).text == dsl.fixture_source("counting_e2").text
        e3 = [kb.unit(n, Level.E3) for n in ("OrdinalNumber", "Set", "Counting")]
        assert dsl.print_canonical(e3).text == dsl.fixture_source("counting_e3").text


class TestPersistence:
    def test_save_load_round_trip(self, tmp_path):
        kb = kbmod.KnowledgeBase.canonical()
        kb.record_outcome("Counting", "T5", "Solved")
        root = kb.save(tmp_path / "kb")
        assert (root / kbmod.MANIFEST).is_file()
        loaded = kbmod.KnowledgeBase.load(root)
        assert len(loaded) == len(kb)
        for unit in kb:
            twin = loaded.unit(unit.name, unit.level)
            assert twin is not None
            assert ir.units_equal(unit, twin)
        assert loaded.log[-1].task == "T5"

    def test_saved_files_are_canonical_listings(self, tmp_path):
        kb = kbmod.KnowledgeBase.canonical()
        root = kb.save(tmp_path / "kb")
        text = (root / "Counting_E2.rr").read_text(encoding="utf-8")
        assert text == dsl.fixture_source("counting_e2").text

    def test_mid_chain_reload_continues_the_ladder(self, tmp_path):
        kb = fresh_kb_with_episode()
        push_to_mastery(kb, "CountingApples")
        kb.advance()
        push_to_mastery(kb, "CountingApples")
        kb.advance()
        root = kb.save(tmp_path / "kb")

        resumed = kbmod.KnowledgeBase.load(root)
        push_to_mastery(resumed, "Counting")
        reports = resumed.advance()
        assert [r.phase for r in reports] == [3]
        assert resumed.unit("Set", Level.E3) is not None

    def test_empty_directory_loads_empty(self, tmp_path):
        empty = tmp_path / "kb"
        empty.mkdir()
        kb = kbmod.KnowledgeBase.load(empty)
        assert len(kb) == 0

    def test_missing_directory_is_io_failure(self, tmp_path):
        with pytest.raises(kbmod.IoFailure):
            kbmod.KnowledgeBase.load(tmp_path / "absent")

    def test_tampered_manifest_is_rejected(self, tmp_path):
        root = kbmod.KnowledgeBase.canonical().save(tmp_path / "kb")
        manifest = root / kbmod.MANIFEST
        lines = manifest.read_text(encoding="utf-8").splitlines(True)
        lines[0] = lines[0].replace("\tapples\t", "\tpears\t")
        manifest.write_text("".join(lines), encoding="utf-8")
        with pytest.raises(kbmod.ManifestError):
            kbmod.KnowledgeBase.load(root)

    def test_unknown_manifest_rows_are_rejected(self, tmp_path):
        root = kbmod.KnowledgeBase.canonical().save(tmp_path / "kb")
        manifest = root / kbmod.MANIFEST
        manifest.write_text(
            manifest.read_text(encoding="utf-8") + "gossip\tx\n", encoding="utf-8"
        )
        with pytest.raises(kbmod.ManifestError):
            kbmod.KnowledgeBase.load(root)
