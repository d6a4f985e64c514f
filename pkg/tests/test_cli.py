import json
from pathlib import Path
from typing import List, cast

import pytest
from click import Command
from click.testing import CliRunner, Result
from pytest_mock import MockerFixture

from trollgraph.evaluation import Report
from trollgraph.snippets import Snippet, SnippetLabels
from trollgraph.synthetic import generate


REPORT_FILES = ("report.txt", "report.jsonl")


def _invoke(main: object, args: List[str]) -> Result:
    return CliRunner().invoke(cast(Command, main), args)


def _write_lines(path: Path, records: List[dict]) -> Path:
    path.write_text("".join(json.dumps(record) + "\n" for record in records))
    return path


@pytest.fixture()
def snippet_file(tmp_path: Path, snippet: Snippet, labels: SnippetLabels) -> Path:
    return _write_lines(tmp_path / "snippets.jsonl", [snippet.to_record(labels)])


class DescribeCli:
    def it_should_return_a_cli_function(self, mocker: MockerFixture):
        from trollgraph.cli import cli_for

        assert callable(cli_for(mocker.MagicMock()))

    def it_should_run_the_experiment(self, mocker: MockerFixture, tmp_path: Path):
        from trollgraph.cli import cli_for

        result_mock = mocker.MagicMock(report=Report("Task  Class\n", ()))
        experiment_mock = mocker.MagicMock(
            run=mocker.AsyncMock(return_value=result_mock)
        )
        experiment_mock.on.return_value = experiment_mock
        factory = mocker.MagicMock(return_value=experiment_mock)

        result = _invoke(
            cli_for(factory),
            ["evaluate", "--synthetic", "6", "--threads", "2", "--out", str(tmp_path)],
        )

        assert result.exit_code == 0
        assert factory.call_args.args[2] == {"workers": 2}
        assert len(factory.call_args.args[0]) == 6
        assert (tmp_path / "report.txt").read_text().endswith("Task  Class\n")
        assert (tmp_path / "report.jsonl").read_text().startswith("#trollgraph")
        assert f"Wrote {tmp_path / 'report.txt'}" in result.output

    @pytest.mark.parametrize("extra", [[], ["--synthetic", "6"]])
    def it_needs_exactly_one_data_source(
        self, mocker: MockerFixture, snippet_file: Path, extra: List[str]
    ):
        from trollgraph.cli import cli_for

        args = ["evaluate", *([str(snippet_file)] if extra else []), *extra]
        result = _invoke(cli_for(mocker.MagicMock()), args)
        assert result.exit_code == 2


class DescribeDataCommands:
    def it_ingests_and_mines_a_dump(self, tmp_path: Path):
        from trollgraph.cli import main

        dump = _write_lines(
            tmp_path / "dump.jsonl",
            [
                {
                    "id": "p1",
                    "link_id": "t3_a",
                    "author": "alice",
                    "body": "Launch day",
                },
                {
                    "id": "s1",
                    "link_id": "t3_a",
                    "parent_id": "t1_p1",
                    "author": "bob",
                    "body": "Rockets are a waste of money",
                },
                {
                    "id": "r1",
                    "link_id": "t3_a",
                    "parent_id": "t1_s1",
                    "author": "alice",
                    "body": "Don't feed the troll.",
                },
            ],
        )
        ingested = _invoke(main, ["ingest", str(dump), "--out", str(tmp_path)])
        assert ingested.exit_code == 0
        assert "Rebuilt 1 tree(s) from 3 comment(s)" in ingested.output

        mined = _invoke(
            main, ["mine", str(tmp_path / "trees.jsonl"), "--out", str(tmp_path)]
        )
        assert mined.exit_code == 0
        assert "Mined 1 snippet(s)" in mined.output
        lines = (tmp_path / "snippets.jsonl").read_text().splitlines()
        assert lines[0].startswith("#trollgraph v0.1.0 seed=0 cmd=mine")
        assert json.loads(lines[1])["snippet_id"] == "s1"

    def it_writes_feature_bags(self, tmp_path: Path, snippet_file: Path):
        from trollgraph.cli import main

        result = _invoke(
            main,
            [
                "featurize",
                str(snippet_file),
                "--features",
                "enhanced",
                "--out",
                str(tmp_path),
            ],
        )
        assert result.exit_code == 0
        record = json.loads((tmp_path / "features.jsonl").read_text().splitlines()[1])
        assert record["snippet_id"] == "s1"
        assert len(record["responses"]) == 2
        assert "polite:thank_you" in record["responses"][1]
        assert any(note.startswith("no-sidecar") for note in record["notes"])

    def it_trains_and_predicts(self, tmp_path: Path):
        from trollgraph.cli import main

        data = _write_lines(
            tmp_path / "snippets.jsonl",
            [snippet.to_record(labels) for snippet, labels in generate(12, seed=1)],
        )
        model_file = tmp_path / "models" / "baseline.json"
        trained = _invoke(
            main,
            [
                "train",
                str(data),
                "--model",
                "baseline",
                "--l2",
                "1.0",
                "--model-file",
                str(model_file),
            ],
        )
        assert trained.exit_code == 0
        assert model_file.read_text().startswith("#trollgraph v0.1.0 seed=0 cmd=train")

        predicted = _invoke(
            main,
            [
                "predict",
                str(data),
                "--model-file",
                str(model_file),
                "--out",
                str(tmp_path),
            ],
        )
        assert predicted.exit_code == 0
        lines = (tmp_path / "predictions.jsonl").read_text().splitlines()
        assert len(lines) == 13
        assert json.loads(lines[1])["snippet_id"] == "syn0001"

    def it_writes_identical_reports_for_a_seed(self, tmp_path: Path):
        from trollgraph.cli import main

        config = tmp_path / "run.toml"
        config.write_text(
            'model_kind = "hybrid"\nk = 3\nl2_grid = [0.1, 1.0]\n\n'
            "[optim]\nmax_iterations = 30\n"
        )
        runs = []
        for n, threads in enumerate(["1", "2"]):
            out = tmp_path / f"run{n}"
            result = _invoke(
                main,
                [
                    "evaluate",
                    "--synthetic",
                    "24",
                    "--seed",
                    "5",
                    "--threads",
                    threads,
                    "--config",
                    str(config),
                    "--out",
                    str(out),
                ],
            )
            assert result.exit_code == 0, result.output
            runs.append(
                {name: (out / name).read_bytes() for name in REPORT_FILES}
            )
        assert runs[0] == runs[1]

    def it_rejects_a_missing_model_file(self, tmp_path: Path, snippet_file: Path):
        from trollgraph.cli import main

        result = _invoke(
            main,
            ["predict", str(snippet_file), "--model-file", str(tmp_path / "none.json")],
        )
        assert result.exit_code == 2

    def it_rejects_an_invalid_config(self, tmp_path: Path, snippet_file: Path):
        from trollgraph.cli import main

        config = tmp_path / "run.toml"
        config.write_text("k = 1\n")
        result = _invoke(main, ["stats", str(snippet_file), "--config", str(config)])
        assert result.exit_code == 2

    def it_counts_the_corpus(self, snippet_file: Path):
        from trollgraph.cli import main

        result = _invoke(main, ["stats", str(snippet_file)])
        assert result.exit_code == 0
        assert result.output == "1 conversations with 4 sentences and 30 tokens\n"


class DescribeKappa:
    def it_prints_one_line_per_aspect(self, tmp_path: Path):
        from trollgraph.cli import main

        path = tmp_path / "annotations.csv"
        path.write_text(
            "s1,a,intention,x\ns1,b,intention,y\ns2,a,intention,x\ns2,b,intention,y\n"
        )
        result = _invoke(main, ["kappa", str(path)])
        assert result.exit_code == 0
        assert result.output == "intention: -1.000 (2 items, 2 annotators)\n"

    def it_exits_with_an_error_on_repeated_ratings(self, tmp_path: Path):
        from trollgraph.cli import main

        path = tmp_path / "annotations.csv"
        path.write_text("s1,a,intention,x\ns1,a,intention,y\n")
        result = _invoke(main, ["kappa", str(path)])
        assert result.exit_code == 1


class DescribeSelfcheck:
    def it_reports_every_check(self):
        from trollgraph.cli import main

        result = _invoke(main, ["selfcheck", "--draws", "6"])
        assert result.exit_code == 0
        assert result.output.startswith("inference")
        assert result.output.endswith("Self-check passed\n")
