"""JSON and CSV I/O for instances, descriptors and result tables.

Every document is validated through its pydantic schema on the way in and on
the way out. Files are written atomically (temporary file, then rename) and JSON
keys are sorted so that equal objects serialize to identical bytes.
"""
import json
import logging
import os
import tempfile

import numpy as np
from pydantic import ValidationError as PydanticValidationError

from .loadbal import LoadBalInstance
from .metric import metric_from_spec
from .norms import norm_from_descriptor
from .ofl import OflInstance
from .probing import DiscreteDistribution, ProbingInstance, family_from_descriptor
from .schemas import (SCHEMA_VERSION, LoadBalInstanceSpec, NormDocument, OflInstanceSpec,
                      ProbingInstanceSpec)
from .utils import ValidationError

logger = logging.getLogger(__name__)

CSV_FLOAT_FORMAT = "%.15g"


def numpy_to_python(obj):
    """Convert numpy arrays and scalars to plain Python for JSON serialization."""
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    elif isinstance(obj, np.integer):
        return int(obj)
    elif isinstance(obj, np.floating):
        return float(obj)
    elif isinstance(obj, dict):
        return {key: numpy_to_python(value) for key, value in obj.items()}
    elif isinstance(obj, (list, tuple)):
        return [numpy_to_python(item) for item in obj]
    else:
        return obj


def _atomic_write(path, text):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise


def dumps_json(obj):
    return json.dumps(numpy_to_python(obj), sort_keys=True, indent=2) + "\n"


def write_json(obj, path):
    _atomic_write(path, dumps_json(obj))
    logger.debug("Wrote %s", path)


def read_json(path):
    try:
        with open(path, encoding="utf-8") as handle:
            return json.load(handle)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path} is not valid JSON: {exc}") from exc
    except OSError as exc:
        raise ValidationError(f"Cannot read {path}: {exc}") from exc


def frame_to_csv(df):
    return df.to_csv(index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")


def write_csv(df, path):
    _atomic_write(path, frame_to_csv(df))
    logger.debug("Wrote %d rows to %s", len(df), path)


def _validate(model, obj, what):
    try:
        return model.model_validate(obj)
    except PydanticValidationError as exc:
        raise ValidationError(f"Invalid {what}: {exc}") from exc


# Norms

def norm_to_dict(norm):
    return _validate(NormDocument, {"norm": norm.descriptor()}, "norm descriptor").norm.model_dump()


def norm_from_dict(obj):
    return norm_from_descriptor(obj)


# Online facility location

def ofl_instance_to_dict(instance):
    if instance.is_uniform:
        costs = {"uniform": instance.uniform_cost}
    else:
        costs = {"per_point": instance.costs.tolist()}
    doc = {"schema": SCHEMA_VERSION, "metric": instance.metric.descriptor(),
           "requests": list(instance.requests), "costs": costs,
           "openable": list(instance.openable), "norm": instance.norm.descriptor()}
    spec = _validate(OflInstanceSpec, doc, "OFL instance")
    return spec.model_dump(by_alias=True, exclude_none=True)


def ofl_instance_from_dict(obj):
    spec = _validate(OflInstanceSpec, obj, "OFL instance")
    metric = metric_from_spec(spec.metric)
    norm = norm_from_descriptor(spec.norm.model_dump())
    if spec.costs.uniform is not None:
        return OflInstance.uniform(metric, spec.requests, spec.costs.uniform, norm, spec.openable)
    return OflInstance(metric, spec.requests, spec.costs.per_point, norm, spec.openable)


# Stochastic probing

def probing_instance_to_dict(instance):
    doc = {"schema": SCHEMA_VERSION,
           "distributions": [X.descriptor() for X in instance.distributions],
           "family": instance.family.descriptor(), "norm": instance.norm.descriptor()}
    spec = _validate(ProbingInstanceSpec, doc, "probing instance")
    return spec.model_dump(by_alias=True, exclude_none=True)


def probing_instance_from_dict(obj):
    spec = _validate(ProbingInstanceSpec, obj, "probing instance")
    distributions = [DiscreteDistribution(X.support, X.probs) for X in spec.distributions]
    family = family_from_descriptor(spec.family.model_dump(exclude_none=True))
    return ProbingInstance(distributions, family, norm_from_descriptor(spec.norm.model_dump()))


# Load balancing

def loadbal_instance_to_dict(instance):
    doc = {"schema": SCHEMA_VERSION, "p": instance.p.tolist(),
           "inner_norms": [psi.descriptor() for psi in instance.inner_norms]}
    spec = _validate(LoadBalInstanceSpec, doc, "load-balancing instance")
    return spec.model_dump(by_alias=True, exclude_none=True)


def loadbal_instance_from_dict(obj):
    spec = _validate(LoadBalInstanceSpec, obj, "load-balancing instance")
    return LoadBalInstance(spec.p, [norm_from_descriptor(psi.model_dump()) for psi in spec.inner_norms])


def load_ofl_instance(path):
    return ofl_instance_from_dict(read_json(path))


def load_probing_instance(path):
    return probing_instance_from_dict(read_json(path))


def load_loadbal_instance(path):
    return loadbal_instance_from_dict(read_json(path))
