from __future__ import annotations


class RelianceLensError(Exception):
    """Base class for every error the toolkit raises on purpose."""


class DomainError(RelianceLensError, ValueError):
    pass


class OutOfScopeAiAccuracy(DomainError):
    def __init__(self, acc: float) -> None:
        super().__init__(
            f"AI accuracy {acc:.9g} is out of scope: the framework assumes an AI that "
            f"performs strictly better than chance (0.5 < Acc_AI <= 1)"
        )
        self.acc = acc


class EmptyCondition(DomainError):
    pass


class AiAccuracyMismatch(DomainError):
    def __init__(self, first: float, second: float, tol: float) -> None:
        super().__init__(
            f"conditions were run with different AI accuracies ({first:.9g} vs {second:.9g}, "
            f"tolerance {tol:g}); the framework compares conditions under one AI only"
        )
        self.first = first
        self.second = second


class PointOutsideEnvelope(DomainError):
    def __init__(self, label: str, adherence: float, final_accuracy: float) -> None:
        super().__init__(
            f"point {label!r} at (A={adherence:.9g}, Acc_final={final_accuracy:.9g}) "
            f"lies outside the attainable region"
        )
        self.label = label


class ConfigError(RelianceLensError):
    pass


class IngestError(RelianceLensError):
    pass


class ParseError(IngestError):
    def __init__(self, message: str, index: int | None = None) -> None:
        location = f"record {index}: " if index is not None else ""
        super().__init__(f"{location}{message}")
        self.index = index


class DuplicateTrial(IngestError):
    def __init__(self, condition_id: str, trial_id: str) -> None:
        super().__init__(f"duplicate trial {trial_id!r} in condition {condition_id!r}")
        self.condition_id = condition_id
        self.trial_id = trial_id


class LabelError(IngestError):
    pass


class EmptyDataset(IngestError):
    pass


class UnknownCondition(RelianceLensError):
    def __init__(self, condition_id: str, known: list[str]) -> None:
        super().__init__(f"unknown condition {condition_id!r}; known: {', '.join(known)}")
        self.condition_id = condition_id
