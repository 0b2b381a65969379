from enum import Enum


class ModelTag(str, Enum):
    """
    Members of the block-model family, nested as SBM ⊂ {DCBM, MMSBM} ⊂ DCMM
    """
    SBM = "SBM"
    DCBM = "DCBM"
    MMSBM = "MMSBM"
    DCMM = "DCMM"

    def nests_in(self, other: "ModelTag") -> bool:
        """True when every network of this model is also a network of `other`."""
        if self == other or self == ModelTag.SBM:
            return True
        return other == ModelTag.DCMM


class VhMethod(str, Enum):
    SP = "sp"
    KNNSP = "knnsp"


class OutputFormat(str, Enum):
    CSV = "csv"
    JSON = "json"


class FitClass(str, Enum):
    GOOD = "good"
    MODERATE = "moderate"
    SIGNIFICANT = "significant"
