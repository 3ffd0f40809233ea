from enum import Enum


class CourtClass(str, Enum):
    """Issuing or cited court. OTHER buckets every non-apex body."""

    SC = "SC"
    SAC = "SAC"
    CC = "CC"
    OTHER = "OTHER"

    @property
    def label(self) -> str:
        return _LABELS[self]


APEX_COURTS = (CourtClass.SC, CourtClass.SAC, CourtClass.CC)

_LABELS = {
    CourtClass.SC: "Supreme Court",
    CourtClass.SAC: "Supreme Adm. Court",
    CourtClass.CC: "Constitutional Court",
    CourtClass.OTHER: "Rest",
}
