"""Recognition models, predictions and evaluation rows"""

from dataclasses import dataclass
from typing import Literal, Tuple, Union

from sklearn.pipeline import Pipeline

from thor2.models.base import BaseModel
from thor2.models.descriptor import DescriptorLayout

Source = Literal["m1", "m2"]
FusionMode = Literal["m1", "m2", "fused"]


class Preprocess(BaseModel):
    """Everything test-time preprocessing must reproduce from training"""

    sigma_s: float
    sigma1: float
    sigma2: float
    alpha: float
    alpha_policy: str
    layout: DescriptorLayout
    network_hash: str
    delta_hash: str


class Prediction(BaseModel):
    """Fused prediction for one object"""

    label: str
    probability: float
    source: Source
    occluded: bool = False


class EvaluationRow(BaseModel):
    """One line of the accuracy report; seed is 'mean' or 'std' on summary rows"""

    split: str
    seed: Union[int, str]
    accuracy: float


@dataclass(frozen=True)
class RecognitionModel:
    """TOPS classifier m1, TOPS2 classifier m2 and their shared metadata"""

    m1: Pipeline
    m2: Pipeline
    labels: Tuple[str, ...]
    preprocess: Preprocess
    seed: int
