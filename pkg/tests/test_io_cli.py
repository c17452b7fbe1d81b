import json
import re
import subprocess
import sys

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _support import FIXTURES, load_case, structure_diff
from taxmerge import io
from taxmerge.cli import main, run_pipeline
from taxmerge.graphs import build_icg
from taxmerge.model import TaxonomyError
from taxmerge.scenarios import ScenarioParams, gen_scenario

RUNNING = FIXTURES / "running"


def running_args(mapping="mapping_eq.json"):
    return [str(RUNNING / "source.json"), str(RUNNING / "target.json"), str(RUNNING / mapping)]


class TestDocuments:
    def test_minimal_document(self, tmp_path):
        p = tmp_path / "one.json"
        p.write_text('{"concepts": [{"id": "a", "label": "A"}]}')
        tax = io.load_taxonomy(p)
        assert [c.label for c in tax.concepts] == ["A"] and tax.isa_edges == ()

    def test_cycle_is_reported(self, tmp_path):
        p = tmp_path / "cyc.json"
        p.write_text(json.dumps({"concepts": [{"id": "a"}, {"id": "b"}], "isa": [["a", "b"], ["b", "a"]]}))
        with pytest.raises(TaxonomyError, match="cycle"):
            io.load_taxonomy(p)

    def test_bad_json_has_line_context(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text('{\n  "concepts": [\n    {"id": "a",,}\n  ]\n}')
        with pytest.raises(io.DocumentError, match="line 3"):
            io.load_taxonomy(p)

    @pytest.mark.parametrize("doc", [[], {"concepts": [{"label": "x"}]}, {"concepts": [{"id": 3}]},
                                     {"concepts": [{"id": "a"}], "isa": [["a"]]}])
    def test_malformed_taxonomies(self, doc):
        with pytest.raises(io.DocumentError):
            io.taxonomy_from_dict(doc)

    @pytest.mark.parametrize("doc", [{}, [{"kind": "same-as", "source": "a", "target": "b"}],
                                     [{"kind": "eq-attribute", "source": "a", "target": ["b", "x"]}],
                                     [{"kind": "eq-concept", "source": ["a"], "target": "b"}]])
    def test_malformed_mappings(self, doc):
        with pytest.raises(io.DocumentError):
            io.mapping_from_list(doc)

    def test_bad_filter_in_mapping_file(self, tmp_path):
        p = tmp_path / "m.json"
        p.write_text(json.dumps([{"kind": "inv-isa", "source": "a", "target": "b", "filter": "[oops]"}]))
        with pytest.raises(io.DocumentError):
            io.load_mapping(p)

    def test_running_fixture_shape(self):
        source, target, mapping, _, _ = load_case("running-extended")
        assert (len(source), len(source.isa_edges)) == (10, 9)
        assert (len(target), len(target.isa_edges)) == (11, 10)
        assert len(mapping.correspondences) == 12

    def test_fixture_round_trip(self, tmp_path):
        for name in ("source", "target"):
            tax = io.load_taxonomy(RUNNING / f"{name}.json")
            io.save_taxonomy(tax, tmp_path / "x.json")
            assert io.load_taxonomy(tmp_path / "x.json") == tax
        mapping = io.load_mapping(RUNNING / "mapping_extended.json")
        io.save_mapping(mapping, tmp_path / "m.json")
        assert io.load_mapping(tmp_path / "m.json") == mapping

    def test_merged_document_keeps_provenance(self, tmp_path):
        source, target, mapping, _, _ = load_case("running-extended")
        res = run_pipeline(source, target, mapping, "extended")
        io.save_taxonomy(res.merged, tmp_path / "merged.json")
        doc = json.loads((tmp_path / "merged.json").read_text(encoding="utf-8"))
        assert doc["root"] == "t:hardware"
        others = next(c for c in doc["concepts"] if c["label"] == "Mouse (others)")
        assert others["filter"] == "[Mouse.brand ≠ 'HP' AND Mouse.brand ≠ 'Dell']"
        assert others["source_concepts"] == ["mouse"]
        again = io.load_taxonomy(tmp_path / "merged.json")
        assert io.labelled_structure(again) == io.labelled_structure(res.merged)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 100_000), st.sampled_from([0.0, 0.3]))
def test_generated_documents_round_trip(tmp_path_factory, seed, mpp):
    d = tmp_path_factory.mktemp("rt")
    sc = gen_scenario(seed, ScenarioParams(concepts=20, multi_parent_prob=mpp, instance_count=20,
                                           isa_rate=0.2, invisa_rate=0.3))
    io.save_taxonomy(sc.source, d / "s.json")
    io.save_mapping(sc.mapping, d / "m.json")
    assert io.load_taxonomy(d / "s.json") == sc.source
    assert io.load_mapping(d / "m.json") == sc.mapping


class TestDot:
    def test_icg_dot_renders_each_node_once(self):
        source, target, mapping, _, _ = load_case("running-extended")
        icg = build_icg(source, target, mapping)
        text = io.icg_dot(icg)
        for n in icg.nodes:
            assert len(re.findall(rf'^  "{re.escape(n.id)}" \[', text, re.M)) == 1
        assert 'label="c1", color="red", style="dotted"' in text
        assert 'label="isa1", color="darkgreen"' in text
        assert 'label="T1", color="black"' in text

    def test_irrelevant_edges_are_dashed(self):
        source, target, mapping, _, _ = load_case("running-base")
        res = run_pipeline(source, target, mapping)
        text = io.icg_dot(res.icg, dict(res.merged.relevance))
        assert re.search(r'label="S1", color="blue", style="dashed"', text)
        assert re.search(r'label="S2", color="blue"\]', text)


class TestCli:
    def test_merge_base_matches_fixture(self, tmp_path, capsys):
        out = tmp_path / "out"
        code = main(["merge", *running_args(), "--out", str(out), "--emit-mappings", "--emit-dot", str(tmp_path / "dot")])
        assert code == 0
        merged = io.load_taxonomy(out / "merged.json")
        expected = json.loads((RUNNING / "expected_base.json").read_text())
        got = io.labelled_structure(merged)
        assert got["concepts"] == sorted(expected["concepts"])
        assert got["edges"] == sorted(expected["edges"])
        report = json.loads((out / "report.json").read_text())
        assert report["relevant_s_edges"] == ["S2", "S3", "S6", "S8", "S9"]
        assert [d["label"] for d in report["dropped"]] == ["Laptops"]
        mappings = json.loads((out / "mappings.json").read_text())
        assert {"from": "laptops_hp", "to": "t:laptops_hp"} in mappings["m_s"]
        assert sorted(p.name for p in (tmp_path / "dot").iterdir()) == ["icg.dot", "matching.dot", "merged.dot"]

    def test_merge_extended(self, tmp_path):
        out = tmp_path / "out"
        assert main(["merge", *running_args("mapping_extended.json"), "--mode", "extended", "--out", str(out)]) == 0
        merged = io.load_taxonomy(out / "merged.json")
        source, target, mapping, expected, _ = load_case("running-extended")
        assert io.labelled_structure(merged) == {
            "concepts": sorted(expected["concepts"]), "edges": sorted(expected["edges"])
        }

    def test_cycle_override_flag(self, tmp_path):
        d = FIXTURES / "toy"
        args = [str(d / "cycle_source.json"), str(d / "cycle_target.json"), str(d / "cycle_mapping.json")]
        out = tmp_path / "o"
        assert main(["merge", *args, "--cycle-override", "B:C", "--out", str(out)]) == 0
        assert json.loads((out / "report.json").read_text())["removed_cycle_edges"] == ["S2"]

    def test_bad_override_syntax(self):
        with pytest.raises(SystemExit):
            main(["merge", *running_args(), "--cycle-override", "nocolon"])

    def test_mappings_command(self, tmp_path):
        out = tmp_path / "m.json"
        assert main(["mappings", *running_args("mapping_extended.json"), "--mode", "extended", "--out", str(out)]) == 0
        doc = json.loads(out.read_text(encoding="utf-8"))
        filters = sorted(r["filter"] for r in doc["m_s"] if r["from"] == "mouse" and "filter" in r)
        assert filters == ["[Mouse.brand ≠ 'HP' AND Mouse.brand ≠ 'Dell']", "[Mouse.brand='Dell']",
                           "[Mouse.brand='HP']"]
        assert doc["errors"] == []

    def test_verify_command(self, tmp_path, capsys):
        out = tmp_path / "v.json"
        assert main(["verify", *running_args(), "--json", str(out)]) == 0
        assert json.loads(out.read_text())["P4"]["passed"] is True
        assert "P1       pass" in capsys.readouterr().out

    def test_validate_command(self, tmp_path, capsys):
        assert main(["validate", str(RUNNING / "source.json"), str(RUNNING / "target.json"),
                     "--mapping", str(RUNNING / "mapping_extended.json")]) == 0
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"concepts": [{"id": "a"}, {"id": "b"}], "isa": [["a", "b"], ["b", "a"]]}))
        assert main(["validate", str(bad)]) == 1
        assert "cycle" in capsys.readouterr().out

    def test_missing_file_exit_code(self, tmp_path):
        assert main(["merge", str(tmp_path / "nope.json"), *running_args()[1:], "--out", str(tmp_path)]) == 1

    def test_invalid_mapping_exit_code(self, tmp_path):
        m = tmp_path / "m.json"
        m.write_text(json.dumps([{"kind": "eq-concept", "source": "mouse", "target": "nowhere"}]))
        assert main(["merge", *running_args()[:2], str(m), "--out", str(tmp_path / "o")]) == 1

    def test_migration_failure_exit_code(self, tmp_path):
        src = tmp_path / "s.json"
        src.write_text(json.dumps({"concepts": [
            {"id": "a", "label": "A", "attributes": ["k"], "instances": [{"id": "i", "values": {"k": "1"}}]}]}))
        tgt = tmp_path / "t.json"
        tgt.write_text(json.dumps({"concepts": [{"id": "x"}, {"id": "y"}]}))
        m = tmp_path / "m.json"
        m.write_text(json.dumps([
            {"kind": "inv-isa", "source": "a", "target": "x", "filter": "[A.k='1']"},
            {"kind": "inv-isa", "source": "a", "target": "y", "filter": "[A.k ≠ '2']"},
        ]))
        assert main(["merge", str(src), str(tgt), str(m), "--mode", "extended", "--out", str(tmp_path / "o")]) == 3

    def test_gen_is_deterministic(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for out in (a, b):
            assert main(["gen", "--seed", "7", "--concepts", "25", "--instances", "10", "--invisa-rate", "0.3",
                         "--out", str(out)]) == 0
        for name in ("source.json", "target.json", "mapping.json"):
            assert (a / name).read_bytes() == (b / name).read_bytes()
        assert main(["merge", str(a / "source.json"), str(a / "target.json"), str(a / "mapping.json"),
                     "--mode", "extended", "--out", str(tmp_path / "o")]) == 0

    def test_gen_rejects_infeasible_params(self, tmp_path):
        assert main(["gen", "--concepts", "100", "--depth", "1", "--fanout", "2", "--out", str(tmp_path)]) == 1

    def test_bench_command(self, tmp_path, capsys):
        assert main(["bench", "--sizes", "200,400", "--out", str(tmp_path)]) == 0
        rows = (tmp_path / "bench.csv").read_text().splitlines()
        assert rows[0].startswith("scenario,source_concepts") and len(rows) == 3
        assert len(json.loads((tmp_path / "bench.json").read_text())) == 2
        assert "R^2" in capsys.readouterr().out

    def test_dot_command(self, tmp_path):
        assert main(["dot", *running_args(), "--out", str(tmp_path)]) == 0
        assert (tmp_path / "merged.dot").read_text().startswith('digraph "merged"')

    def test_target_preferred_label_mode(self, tmp_path):
        out = tmp_path / "o"
        assert main(["merge", *running_args(), "--label-mode", "target-preferred", "--out", str(out)]) == 0
        labels = {c.label for c in io.load_taxonomy(out / "merged.json").concepts}
        assert "Hardware" in labels and "Hardware*" not in labels

    def test_log_env_var(self, tmp_path, monkeypatch, capsys):
        monkeypatch.setenv("TAXMERGE_LOG", "info")
        import logging
        logging.getLogger().handlers.clear()
        assert main(["merge", *running_args(), "--out", str(tmp_path)]) == 0
        assert "dropped Laptops" in capsys.readouterr().err

    def test_console_script(self, tmp_path):
        proc = subprocess.run([sys.executable, "-m", "taxmerge.cli", "verify", *running_args()],
                              capture_output=True, text=True)
        assert proc.returncode == 0 and "acyclic  pass" in proc.stdout


def test_structure_helper_reports_differences():
    source, target, mapping, expected, _ = load_case("running-base")
    res = run_pipeline(source, target, mapping)
    broken = dict(expected, root="Nope")
    assert structure_diff(res.merged, broken) == ["root 'Hardware*' != 'Nope'"]
