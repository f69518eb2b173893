import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from miniasm import (
    DataObject,
    DuplicatePipeline,
    EmptyPipeline,
    MissingKey,
    MissingPipelineName,
    OverwriteViolation,
    Phase,
    PhaseRegistry,
    PhaseSpec,
    PipelineSpec,
    UnknownPhase,
    UnknownSnapshot,
    XmlSyntax,
    branch,
    parse_settings,
    run_phase,
    run_pipeline,
    serialize_settings,
    snapshot,
)

from .conftest import DEFAULT_SETTINGS_XML


class TestDataObject:
    def test_put_get(self):
        d = DataObject()
        d.put("a", 1)
        assert d.get("a") == 1
        assert d.has("a")
        assert not d.has("b")

    def test_overwrite_rejected(self):
        d = DataObject()
        d.put("a", 1)
        with pytest.raises(OverwriteViolation) as exc:
            d.put("a", 2)
        assert exc.value.key == "a"
        assert d.get("a") == 1

    def test_missing_key(self):
        with pytest.raises(MissingKey):
            DataObject().get("nope")

    def test_keys_are_insertion_ordered(self):
        d = DataObject()
        d.put("z", 0)
        d.put("a", 1)
        assert d.keys() == ["z", "a"]

    def test_branch_sees_parent_keys(self):
        d = DataObject()
        d.put("a", 1)
        child = branch(snapshot(d))
        assert child.get("a") == 1
        assert child.keys() == ["a"]

    def test_branch_cannot_shadow_parent(self):
        d = DataObject()
        d.put("a", 1)
        child = branch(snapshot(d))
        with pytest.raises(OverwriteViolation):
            child.put("a", 2)

    def test_sibling_isolation(self):
        d = DataObject()
        d.put("a", 1)
        sid = snapshot(d)
        left, right = branch(sid), branch(sid)
        left.put("x", "L")
        right.put("x", "R")
        assert left.get("x") == "L"
        assert right.get("x") == "R"
        assert not d.has("x")

    def test_parent_additions_after_snapshot_are_invisible(self):
        d = DataObject()
        d.put("a", 1)
        child = branch(snapshot(d))
        d.put("later", 2)
        assert not child.has("later")
        child.put("later", "mine")
        assert child.get("later") == "mine"

    def test_unknown_snapshot(self):
        with pytest.raises(UnknownSnapshot):
            branch("definitely-not-a-snapshot")

    def test_deep_branch_chain(self):
        d = DataObject()
        d.put("k0", 0)
        for i in range(1, 6):
            d = branch(snapshot(d))
            d.put(f"k{i}", i)
        assert d.keys() == [f"k{i}" for i in range(6)]
        assert [d.get(f"k{i}") for i in range(6)] == list(range(6))

    @given(st.lists(st.tuples(st.integers(0, 5), st.booleans()), min_size=1, max_size=20))
    @settings(max_examples=100)
    def test_branch_isolation_property(self, ops):
        """Random interleavings of puts and branches never leak writes."""
        root = DataObject()
        objs = [root]
        shadow = [dict()]  # expected visible mapping per object
        counter = 0
        for key_idx, do_branch in ops:
            target = key_idx % len(objs)
            if do_branch:
                objs.append(branch(snapshot(objs[target])))
                shadow.append(dict(shadow[target]))
            else:
                key = f"k{key_idx}"
                if key in shadow[target]:
                    with pytest.raises(OverwriteViolation):
                        objs[target].put(key, counter)
                else:
                    objs[target].put(key, counter)
                    shadow[target][key] = counter
                counter += 1
        for obj, expected in zip(objs, shadow):
            assert obj.items() == expected


class RecordingPhase(Phase):
    name = "test.Recording"
    requires = frozenset({"in"})
    provides = frozenset({"out"})

    def run(self, data, params, log):
        log("running")
        data.put("out", params.get("value", "done"))


class ExplodingPhase(Phase):
    name = "test.Exploding"

    def run(self, data, params, log):
        raise RuntimeError("boom")


class ForgetfulPhase(Phase):
    name = "test.Forgetful"
    provides = frozenset({"result"})

    def run(self, data, params, log):
        pass  # never writes what it promised


class SneakyPhase(Phase):
    name = "test.Sneaky"

    def run(self, data, params, log):
        data._entries["existing"] = "mutated"  # bypasses put() on purpose


class TestRunPhase:
    def test_ok_report(self):
        d = DataObject()
        d.put("in", 1)
        report = run_phase(RecordingPhase(), d)
        assert report.ok
        assert report.status == "ok"
        assert report.keys_added == ("out",)
        assert report.log == ("running",)
        assert report.wall_millis >= 0
        assert d.get("out") == "done"

    def test_params_override_defaults(self):
        d = DataObject()
        d.put("in", 1)
        run_phase(RecordingPhase(), d, {"value": 42})
        assert d.get("out") == 42

    def test_missing_precondition(self):
        d = DataObject()
        report = run_phase(RecordingPhase(), d)
        assert report.status == "failed(precondition: in)"
        assert not report.ok
        assert report.keys_added == ()
        assert d.keys() == []

    def test_exception_captured(self):
        d = DataObject()
        report = run_phase(ExplodingPhase(), d)
        assert report.status == "failed(RuntimeError: boom)"

    def test_postcondition_checked(self):
        d = DataObject()
        report = run_phase(ForgetfulPhase(), d)
        assert report.status == "failed(postcondition: result)"

    def test_mutation_detected(self):
        d = DataObject()
        d.put("existing", "original")
        report = run_phase(SneakyPhase(), d)
        assert report.status == "failed(OverwriteViolation: existing)"

    def test_reports_accumulate_in_lineage(self):
        d = DataObject()
        d.put("in", 1)
        run_phase(RecordingPhase(), d)
        run_phase(ExplodingPhase(), d)
        assert [r.phase_name for r in d.lineage] == ["test.Recording", "test.Exploding"]

    def test_report_to_dict(self):
        d = DataObject()
        d.put("in", 1)
        rep = run_phase(RecordingPhase(), d).to_dict()
        assert rep["phaseName"] == "test.Recording"
        assert rep["status"] == "ok"
        assert rep["keysAdded"] == ["out"]
        assert isinstance(rep["wallMillis"], int)


class TestRunPipeline:
    def _registry(self):
        reg = PhaseRegistry()
        for phase in (RecordingPhase(), ExplodingPhase(), ForgetfulPhase()):
            reg.register(phase)
        return reg

    def test_runs_in_order(self):
        spec = PipelineSpec("p", (PhaseSpec("test.Recording"),))
        d = DataObject()
        d.put("in", 1)
        reports = run_pipeline(spec, d, self._registry())
        assert [r.status for r in reports] == ["ok"]

    def test_stops_at_first_failure(self):
        spec = PipelineSpec(
            "p",
            (PhaseSpec("test.Exploding"), PhaseSpec("test.Recording")),
        )
        d = DataObject()
        d.put("in", 1)
        reports = run_pipeline(spec, d, self._registry())
        assert len(reports) == 1
        assert not reports[0].ok
        assert not d.has("out")

    def test_unknown_phase_aborts_before_running_anything(self):
        spec = PipelineSpec(
            "p",
            (PhaseSpec("test.Recording"), PhaseSpec("test.Nope")),
        )
        d = DataObject()
        d.put("in", 1)
        with pytest.raises(UnknownPhase):
            run_pipeline(spec, d, self._registry())
        assert not d.has("out")

    def test_registry_is_case_sensitive(self):
        with pytest.raises(UnknownPhase):
            self._registry().resolve("test.recording")

    def test_params_flow_from_spec(self):
        spec = PipelineSpec("p", (PhaseSpec("test.Recording", {"value": "from-xml"}),))
        d = DataObject()
        d.put("in", 1)
        run_pipeline(spec, d, self._registry())
        assert d.get("out") == "from-xml"


class TestSettingsXml:
    def test_default_document(self):
        (spec,) = parse_settings(DEFAULT_SETTINGS_XML)
        assert spec.name == "default"
        assert [p.name for p in spec.phases] == [
            "miniasm.ScanReadsPhase",
            "miniasm.BuildGraphPhase",
            "miniasm.FindTipsPhase",
            "miniasm.ComputeCoveragePhase",
            "miniasm.FindPathsPhase",
        ]
        assert all(dict(p.params) == {} for p in spec.phases)

    def test_empty_settings(self):
        assert parse_settings("<settings/>") == []

    def test_phase_params(self):
        xml = (
            '<settings><pipeline name="p">'
            '<phase>x.Y<param name="cut" value="5"/></phase>'
            "</pipeline></settings>"
        )
        (spec,) = parse_settings(xml)
        assert dict(spec.phases[0].params) == {"cut": "5"}

    def test_multiple_pipelines(self):
        xml = (
            "<settings>"
            '<pipeline name="a"><phase>x.Y</phase></pipeline>'
            '<pipeline name="b"><phase>x.Z</phase></pipeline>'
            "</settings>"
        )
        specs = parse_settings(xml)
        assert [s.name for s in specs] == ["a", "b"]

    def test_syntax_error_carries_line(self):
        with pytest.raises(XmlSyntax) as exc:
            parse_settings("<settings>\n<pipeline name='p'>\n</settings>")
        assert exc.value.line == 3

    def test_missing_pipeline_name(self):
        with pytest.raises(MissingPipelineName):
            parse_settings("<settings><pipeline><phase>x.Y</phase></pipeline></settings>")

    def test_empty_pipeline(self):
        with pytest.raises(EmptyPipeline):
            parse_settings('<settings><pipeline name="p"/></settings>')

    def test_duplicate_pipeline(self):
        xml = (
            "<settings>"
            '<pipeline name="p"><phase>x.Y</phase></pipeline>'
            '<pipeline name="p"><phase>x.Z</phase></pipeline>'
            "</settings>"
        )
        with pytest.raises(DuplicatePipeline):
            parse_settings(xml)

    def test_serialize_roundtrip(self):
        specs = parse_settings(DEFAULT_SETTINGS_XML)
        assert parse_settings(serialize_settings(specs)) == specs

    def test_serialize_roundtrip_with_params(self):
        specs = [
            PipelineSpec(
                "tuned",
                (
                    PhaseSpec("x.Y", {"cut": "5", "mode": "fast"}),
                    PhaseSpec("x.Z"),
                ),
            )
        ]
        assert parse_settings(serialize_settings(specs)) == specs

    names = st.builds(
        lambda head, tail: head + tail,
        st.sampled_from("aBcXyZ"),
        st.text(alphabet="aBz09_.", max_size=8),
    )

    @given(
        st.lists(
            st.tuples(
                names,
                st.lists(
                    st.tuples(names, st.dictionaries(names, names, max_size=3)),
                    min_size=1,
                    max_size=4,
                ),
            ),
            min_size=0,
            max_size=4,
            unique_by=lambda t: t[0],
        )
    )
    @settings(max_examples=60)
    def test_serialize_roundtrip_property(self, raw):
        specs = [
            PipelineSpec(name, tuple(PhaseSpec(pn, pp) for pn, pp in phases))
            for name, phases in raw
        ]
        assert parse_settings(serialize_settings(specs)) == specs
