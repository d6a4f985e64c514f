"""Model files and output artifacts.

Every artifact written by the command line starts with a header line
`#trollgraph v<version> seed=<seed> cmd=<command>`; readers skip it like any other `#`
line. A model file is the header followed by a single JSON document holding the kind
of model, its feature configuration, the label orderings, the vocabularies and every
weight array as a shape plus its values in row-major order. Floats are written with
their shortest round-tripping representation, so loading restores the arrays exactly.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Tuple, Union

import numpy as np

from trollgraph import errors, parsers
from trollgraph.crf import CrfParams, Decoding
from trollgraph.features import FeatureConfig, FeatureSpace, Vocabulary
from trollgraph.models import (
    AnyModel,
    Classifier,
    HybridModel,
    JointModel,
    ModelKind,
    PipelineModel,
)
from trollgraph.optim import LogRegWeights
from trollgraph.snippets import SnippetLabels, Task

__all__ = [
    "MODEL_FORMAT",
    "MODEL_VERSION",
    "artifact_header",
    "model_to_record",
    "model_from_record",
    "dumps_model",
    "loads_model",
    "save_model",
    "load_model",
    "prediction_record",
    "dumps_records",
    "read_predictions",
]

MODEL_FORMAT = "trollgraph-model"
MODEL_VERSION = 1

PathLike = Union[str, Path]


def artifact_header(seed: int, command: str) -> str:
    from trollgraph import __version__

    return f"{parsers.HEADER_PREFIX}trollgraph v{__version__} seed={seed} cmd={command}"


def _encode_array(array: np.ndarray) -> parsers.Record:
    return {"shape": list(array.shape), "data": array.ravel().tolist()}


def _decode_array(record: Mapping[str, Any]) -> np.ndarray:
    try:
        return np.array(record["data"], dtype=np.float64).reshape(record["shape"])
    except (KeyError, TypeError, ValueError) as e:
        msg = f"Malformed array: {e}"
        raise errors.ModelFormatError(msg) from e


def _encode_classifier(classifier: Classifier) -> parsers.Record:
    return {
        "task": classifier.task.value,
        "vocabulary": classifier.vocabulary.names,
        "labels": list(classifier.weights.labels),
        "weights": _encode_array(classifier.weights.weights),
        "bias": _encode_array(classifier.weights.bias),
    }


def _decode_classifier(record: Mapping[str, Any]) -> Classifier:
    task = Task(record["task"])
    labels = tuple(record["labels"])
    if labels != tuple(label.value for label in task.labels):
        msg = f"The {task.value} labels of the model file do not match this version."
        raise errors.ModelFormatError(msg)
    vocabulary = Vocabulary(record["vocabulary"], frozen=True)
    weights = LogRegWeights(
        _decode_array(record["weights"]), _decode_array(record["bias"]), labels
    )
    if weights.dimension != vocabulary.dimension:
        raise errors.DimensionMismatchError(
            vocabulary.dimension, weights.dimension, "weight matrix"
        )
    return Classifier(task, vocabulary, weights)


def _encode_crf(space: FeatureSpace, params: CrfParams) -> parsers.Record:
    return {
        "context_vocabulary": space.context.names,
        "response_vocabulary": space.response.names,
        "tasks": [task.value for task in Task if task in params.tasks],
        "blocks": {name: _encode_array(params[name]) for name, _ in params.layout},
    }


def _decode_crf(
    record: Mapping[str, Any], config: FeatureConfig
) -> Tuple[FeatureSpace, CrfParams]:
    space = FeatureSpace(
        context=Vocabulary(record["context_vocabulary"], frozen=True),
        response=Vocabulary(record["response_vocabulary"], frozen=True),
        config=config,
    )
    try:
        params = CrfParams(
            context_dim=space.context.dimension,
            response_dim=space.response.dimension,
            tasks=frozenset(Task(task) for task in record["tasks"]),
            blocks={
                name: _decode_array(block) for name, block in record["blocks"].items()
            },
        )
    except ValueError as e:
        raise errors.ModelFormatError(str(e)) from e
    return space, params


def model_to_record(
    model: AnyModel, training: Optional[Mapping[str, Any]] = None
) -> parsers.Record:
    """The JSON document of a model.

    Args:
        model (AnyModel): The model.
        training (Mapping[str, Any], optional): Training settings recorded alongside,
            such as the regularization strength.
    """
    record: parsers.Record = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "kind": model.kind.value,
        "features": model.features.to_record(),
        "labels": {task.value: [label.value for label in task.labels] for task in Task},
        "training": dict(training or {}),
    }
    if isinstance(model, PipelineModel):
        record["classifiers"] = [
            _encode_classifier(model.classifiers[task]) for task in Task
        ]
    else:
        record["crf"] = _encode_crf(model.space, model.params)
        record["decoding"] = model.decoding.value
        if isinstance(model, HybridModel):
            record["strategy"] = _encode_classifier(model.strategy)
    return record


def model_from_record(record: Mapping[str, Any]) -> AnyModel:
    """Rebuild a model from its JSON document.

    Raises:
        errors.ModelFormatError: If the document is not a model of a known version.
    """
    if record.get("format") != MODEL_FORMAT:
        msg = "Not a trollgraph model file."
        raise errors.ModelFormatError(msg)
    if record.get("version") != MODEL_VERSION:
        msg = f"Unsupported model file version {record.get('version')!r}."
        raise errors.ModelFormatError(msg)
    for task in Task:
        if record.get("labels", {}).get(task.value) != [
            label.value for label in task.labels
        ]:
            msg = f"The {task.value} labels of the model file do not match."
            raise errors.ModelFormatError(msg)
    try:
        kind = ModelKind(record["kind"])
        config = FeatureConfig.from_record(record.get("features", {}))
        if kind is ModelKind.BASELINE:
            classifiers = [_decode_classifier(c) for c in record["classifiers"]]
            return PipelineModel({c.task: c for c in classifiers}, config)
        space, params = _decode_crf(record["crf"], config)
        decoding = Decoding(record.get("decoding", Decoding.MAP.value))
        if kind is ModelKind.JOINT:
            return JointModel(space, params, decoding)
        return HybridModel(
            space, params, _decode_classifier(record["strategy"]), decoding
        )
    except (KeyError, TypeError, ValueError) as e:
        msg = f"Malformed model file: {e}"
        raise errors.ModelFormatError(msg) from e


def dumps_model(
    model: AnyModel,
    header: Optional[str] = None,
    training: Optional[Mapping[str, Any]] = None,
) -> str:
    body = json.dumps(model_to_record(model, training), sort_keys=True)
    return f"{header}\n{body}\n" if header else f"{body}\n"


def loads_model(text: str) -> AnyModel:
    """Read a model back from the text of a model file.

    Raises:
        errors.ModelFormatError: If the text holds no model document.
    """
    body = "\n".join(
        line for line in text.splitlines() if not line.startswith(parsers.HEADER_PREFIX)
    )
    try:
        record = json.loads(body)
    except json.JSONDecodeError as e:
        msg = f"Invalid model file: {e.msg}"
        raise errors.ModelFormatError(msg) from e
    if not isinstance(record, dict):
        msg = "Invalid model file: expected an object."
        raise errors.ModelFormatError(msg)
    return model_from_record(record)


def save_model(
    model: AnyModel,
    path: PathLike,
    *,
    seed: int = 0,
    training: Optional[Mapping[str, Any]] = None,
) -> None:
    Path(path).write_text(
        dumps_model(model, artifact_header(seed, "train"), training), encoding="utf-8"
    )


def load_model(path: PathLike) -> AnyModel:
    model_path = Path(path)
    if not model_path.is_file():
        msg = f'Model file "{model_path}" does not exist.'
        raise errors.ModelFormatError(msg)
    return loads_model(model_path.read_text(encoding="utf-8"))


def prediction_record(snippet_id: str, labels: SnippetLabels) -> parsers.Record:
    """A prediction, with the same schema as gold labels plus the snippet id."""
    return {"snippet_id": snippet_id, **labels.to_record()}


def dumps_records(
    records: Iterable[Mapping[str, Any]], header: Optional[str] = None
) -> str:
    """Newline-delimited JSON with an optional header line."""
    lines: List[str] = [header] if header else []
    lines.extend(json.dumps(dict(record), sort_keys=True) for record in records)
    return "".join(line + "\n" for line in lines)


def read_predictions(lines: Iterable[str]) -> Dict[str, SnippetLabels]:
    """Read a prediction file into labels keyed by snippet id.

    Raises:
        errors.InvalidRecordError: If a record is malformed.
    """
    parser = parsers.parse_json_lines(lines, strict=True)
    predictions = {}
    for line, record in parser.found_records:
        try:
            predictions[str(record["snippet_id"])] = SnippetLabels.from_record(record)
        except (KeyError, ValueError, errors.LabelError) as e:
            raise errors.InvalidRecordError(line, str(e)) from e
    return predictions
