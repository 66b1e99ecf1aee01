"""
Object recognition with two classifiers: m1 over TOPS, m2 over TOPS2.
Test-time predictions are fused by taking the more confident model.
"""

import time
import warnings
from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import structlog
from scipy import ndimage
from sklearn.exceptions import ConvergenceWarning
from sklearn.neural_network import MLPClassifier
from sklearn.pipeline import Pipeline, make_pipeline
from sklearn.preprocessing import MaxAbsScaler

from thor2.core.config import Settings
from thor2.core.exceptions import DataException, HashMismatchException, ValidationException
from thor2.core.workers import map_ordered
from thor2.models.cloud import ColoredCloud
from thor2.models.descriptor import DescriptorLayout, ObjectDescriptor
from thor2.models.network import SimilarityMatrix
from thor2.models.recognition import (
    EvaluationRow,
    FusionMode,
    Prediction,
    Preprocess,
    RecognitionModel,
)
from thor2.services.descriptor import build_layout, describe, descriptor_config_hash, stack
from thor2.services.geometry import prepare_cloud
from thor2.services.mapper_network import RegionLookup

logger = structlog.get_logger()

EIGHT_NEIGHBOURHOOD = np.ones((3, 3), dtype=bool)


@dataclass(frozen=True)
class ColorArtifacts:
    """Colour network lookup and similarity matrix shared by all objects"""

    lookup: RegionLookup
    delta: SimilarityMatrix

    def __post_init__(self):
        if self.delta.network_hash != self.lookup.network.digest():
            raise HashMismatchException(
                "Similarity matrix was built from a different color network",
                details={
                    "delta_network": self.delta.network_hash,
                    "network": self.lookup.network.digest(),
                },
            )


# ==================== Descriptors ====================


def describe_clouds(
    clouds: Sequence[ColoredCloud],
    occluded: Sequence[bool],
    artifacts: ColorArtifacts,
    layout: DescriptorLayout,
    settings: Settings,
) -> List[Union[ObjectDescriptor, DataException]]:
    """Descriptors in input order; per-object data errors are returned, not raised"""

    def run(item: Tuple[ColoredCloud, bool]) -> Union[ObjectDescriptor, DataException]:
        cloud, flag = item
        try:
            sliced = prepare_cloud(cloud, settings.slicing, occluded=flag)
            return describe(sliced, artifacts.lookup, artifacts.delta, layout, settings.descriptor)
        except DataException as e:
            return e

    return map_ordered(run, list(zip(clouds, occluded)), settings.workers)


# ==================== Training ====================


def _classifier(settings: Settings, seed: int) -> Pipeline:
    """MLP behind max-abs scaling, which keeps zero-padded blocks at exactly zero"""
    return make_pipeline(
        MaxAbsScaler(),
        MLPClassifier(
            hidden_layer_sizes=(settings.model.hidden_units,),
            activation="relu",
            solver="adam",
            alpha=settings.model.l2_penalty,
            learning_rate_init=settings.model.learning_rate_init,
            max_iter=settings.model.max_iter,
            random_state=seed,
        ),
    )


def train(
    dataset: Sequence[Tuple[ColoredCloud, str]],
    artifacts: ColorArtifacts,
    settings: Settings,
    seed: Optional[int] = None,
    labels: Optional[Sequence[str]] = None,
) -> RecognitionModel:
    """
    Fit m1 on TOPS and m2 on TOPS2 descriptors of unoccluded training clouds.

    Raises:
        DataException: Fewer than 2 classes, a declared label without samples, or
            "label table mismatch" for samples outside the declared labels
    """
    start_time = time.time()
    seed = settings.seed if seed is None else seed

    counts = Counter(label for _, label in dataset)
    table = tuple(sorted(set(labels) if labels is not None else counts))
    unknown = sorted(set(counts) - set(table))
    if unknown:
        raise DataException("label table mismatch", details={"unknown": unknown, "model_labels": list(table)})
    empty = [label for label in table if counts[label] == 0]
    if empty:
        raise DataException("empty class", details={"labels": empty})
    if len(table) < 2:
        raise DataException("training needs at least 2 classes", details={"labels": list(table)})

    clouds = [cloud for cloud, _ in dataset]
    sliced = map_ordered(
        lambda c: prepare_cloud(c, settings.slicing, occluded=False), clouds, settings.workers
    )
    layout = build_layout(
        sliced,
        n_c=artifacts.lookup.network.n_c,
        slicing=settings.slicing,
        descriptor=settings.descriptor,
        network_hash=artifacts.delta.network_hash,
    )
    descriptors = map_ordered(
        lambda s: describe(s, artifacts.lookup, artifacts.delta, layout, settings.descriptor),
        sliced,
        settings.workers,
    )

    index = {label: k for k, label in enumerate(table)}
    y = np.array([index[label] for _, label in dataset])
    design = stack(descriptors)

    m1, m2 = _classifier(settings, seed), _classifier(settings, seed)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", ConvergenceWarning)
        m1.fit(design["tops"], y)
        m2.fit(design["tops2"], y)
    if any(issubclass(w.category, ConvergenceWarning) for w in caught):
        logger.warning("Classifier did not converge", max_iter=settings.model.max_iter)

    preprocess = Preprocess(
        sigma_s=settings.slicing.sigma_s,
        sigma1=settings.slicing.sigma1,
        sigma2=settings.slicing.sigma2,
        alpha=settings.slicing.alpha,
        alpha_policy=settings.slicing.alpha_policy,
        layout=layout,
        network_hash=artifacts.delta.network_hash,
        delta_hash=artifacts.delta.digest(),
    )

    logger.info(
        "Recognition model trained",
        samples=len(dataset),
        classes=len(table),
        tops_dim=layout.tops_length,
        tops2_dim=layout.tops2_length,
        seed=seed,
        duration_ms=round((time.time() - start_time) * 1000, 2),
    )
    return RecognitionModel(m1=m1, m2=m2, labels=table, preprocess=preprocess, seed=seed)


# ==================== Occlusion ====================


def detect_occlusion(mask: np.ndarray, other_masks: Union[np.ndarray, Sequence[np.ndarray]]) -> bool:
    """
    True if the mask's boundary is 8-adjacent to another mask or touches the image border.

    Raises:
        ValidationException: If the mask is empty
    """
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        raise ValidationException("object mask is empty")

    if mask[0, :].any() or mask[-1, :].any() or mask[:, 0].any() or mask[:, -1].any():
        return True

    if isinstance(other_masks, np.ndarray) and other_masks.ndim == mask.ndim:
        others = other_masks.astype(bool)
    else:
        others = np.zeros_like(mask)
        for other in other_masks:
            others |= np.asarray(other, dtype=bool)
    others &= ~mask

    boundary = mask & ~ndimage.binary_erosion(mask, structure=EIGHT_NEIGHBOURHOOD)
    reach = ndimage.binary_dilation(boundary, structure=EIGHT_NEIGHBOURHOOD)
    return bool((reach & others).any())


def occlusion_flags(segmentation: np.ndarray) -> Dict[int, bool]:
    """Occlusion flag of every instance id (> 0) in a segmentation map"""
    segmentation = np.asarray(segmentation)
    flags = {}
    for instance in np.unique(segmentation):
        if instance == 0:
            continue
        mask = segmentation == instance
        others = (segmentation != 0) & ~mask
        flags[int(instance)] = detect_occlusion(mask, others)
    return flags


# ==================== Prediction ====================


def check_compatible(model: RecognitionModel, artifacts: ColorArtifacts, settings: Settings) -> None:
    """
    Raises:
        HashMismatchException: If artifacts or preprocessing differ from training
    """
    if model.preprocess.network_hash != artifacts.delta.network_hash:
        raise HashMismatchException(
            "Model was trained against a different color network",
            details={"model": model.preprocess.network_hash, "runtime": artifacts.delta.network_hash},
        )
    if model.preprocess.delta_hash != artifacts.delta.digest():
        raise HashMismatchException("Model was trained against a different similarity matrix")

    runtime = descriptor_config_hash(settings.slicing, settings.descriptor)
    if model.preprocess.layout.config_hash != runtime:
        raise HashMismatchException(
            "Slicing or descriptor settings differ from training",
            details={"model": model.preprocess.layout.config_hash, "runtime": runtime},
        )


def check_labels(labels: Iterable[str], model: RecognitionModel) -> None:
    """
    Raises:
        DataException: "label table mismatch" for labels the model was not trained on
    """
    unknown = sorted(set(labels) - set(model.labels))
    if unknown:
        raise DataException(
            "label table mismatch", details={"unknown": unknown, "model_labels": list(model.labels)}
        )


def fuse(
    p1: np.ndarray, p2: np.ndarray, labels: Sequence[str], mode: FusionMode = "fused", occluded: bool = False
) -> Prediction:
    """Pick the more confident of the two probability vectors; m2 wins ties"""
    if mode == "m1" or (mode == "fused" and p1.max() > p2.max()):
        probs, source = p1, "m1"
    else:
        probs, source = p2, "m2"
    k = int(np.argmax(probs))
    return Prediction(label=labels[k], probability=float(probs[k]), source=source, occluded=occluded)


def predict_descriptor(
    descriptor: ObjectDescriptor, model: RecognitionModel, mode: FusionMode = "fused", occluded: bool = False
) -> Prediction:
    p1 = model.m1.predict_proba(descriptor.tops[None, :])[0]
    p2 = model.m2.predict_proba(descriptor.tops2[None, :])[0]
    return fuse(p1, p2, model.labels, mode, occluded)


def predict(
    cloud: ColoredCloud,
    occluded: bool,
    model: RecognitionModel,
    artifacts: ColorArtifacts,
    settings: Settings,
    mode: Optional[FusionMode] = None,
) -> Prediction:
    """
    Raises:
        DataException: Slice or strip overflow
        HashMismatchException: Artifacts or settings differ from training
    """
    check_compatible(model, artifacts, settings)
    sliced = prepare_cloud(cloud, settings.slicing, occluded=occluded)
    descriptor = describe(
        sliced, artifacts.lookup, artifacts.delta, model.preprocess.layout, settings.descriptor
    )
    return predict_descriptor(descriptor, model, mode or settings.model.fusion, occluded)


def predict_many(
    clouds: Sequence[ColoredCloud],
    occluded: Sequence[bool],
    model: RecognitionModel,
    artifacts: ColorArtifacts,
    settings: Settings,
    mode: Optional[FusionMode] = None,
) -> List[Union[Prediction, DataException]]:
    """Predictions in input order; objects that fail to describe yield their error"""
    check_compatible(model, artifacts, settings)
    descriptors = describe_clouds(clouds, occluded, artifacts, model.preprocess.layout, settings)
    return [
        d if isinstance(d, DataException) else predict_descriptor(d, model, mode or settings.model.fusion, flag)
        for d, flag in zip(descriptors, occluded)
    ]


# ==================== Evaluation ====================


def evaluate(
    dataset: Sequence[Tuple[ColoredCloud, str, bool, str]],
    model: RecognitionModel,
    artifacts: ColorArtifacts,
    settings: Settings,
    mode: Optional[FusionMode] = None,
) -> List[EvaluationRow]:
    """
    Accuracy per split plus an 'overall' row, for entries (cloud, label, occluded, split).
    Objects that overflow the layout count as misses.

    Raises:
        DataException: "label table mismatch" for labels outside the model's table
    """
    check_labels((entry[1] for entry in dataset), model)
    predictions = predict_many(
        [entry[0] for entry in dataset], [entry[2] for entry in dataset], model, artifacts, settings, mode
    )

    hits: Dict[str, List[bool]] = defaultdict(list)
    overflow = 0
    for (_, label, _, split), prediction in zip(dataset, predictions):
        if isinstance(prediction, DataException):
            overflow += 1
            correct = False
        else:
            correct = prediction.label == label
        hits[split].append(correct)
        hits["overall"].append(correct)

    if overflow:
        logger.warning("Objects could not be described", count=overflow)

    rows = [
        EvaluationRow(split=split, seed=model.seed, accuracy=float(np.mean(values)))
        for split, values in sorted(hits.items())
        if split != "overall"
    ]
    if hits:
        rows.append(
            EvaluationRow(split="overall", seed=model.seed, accuracy=float(np.mean(hits["overall"])))
        )
    return rows


def summarize(rows: Sequence[EvaluationRow]) -> List[EvaluationRow]:
    """Input rows followed by mean and std (over seeds) per split"""
    by_split: Dict[str, List[float]] = defaultdict(list)
    for row in rows:
        if isinstance(row.seed, int):
            by_split[row.split].append(row.accuracy)

    summary = list(rows)
    for split, values in by_split.items():
        summary.append(EvaluationRow(split=split, seed="mean", accuracy=float(np.mean(values))))
        summary.append(EvaluationRow(split=split, seed="std", accuracy=float(np.std(values))))
    return summary
