"""Online structured prediction from coactive (improved-object) feedback."""

from .learners import (BatchPreferencePerceptron, ConvexPreferencePerceptron, LearnerState,
                       PreferencePerceptron)
from .utility import GroundTruthUtility, JointFeatureMap, dot, scale_add, utility

__version__ = "0.1.0"

__all__ = [
    "BatchPreferencePerceptron", "ConvexPreferencePerceptron", "LearnerState",
    "PreferencePerceptron", "GroundTruthUtility", "JointFeatureMap", "dot", "scale_add",
    "utility",
]
