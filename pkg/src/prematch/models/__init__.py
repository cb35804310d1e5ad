from prematch.models.base import (
    DnnSpec,
    GboostSpec,
    KnnSpec,
    ModelSpec,
    RfSpec,
    SvcSpec,
    TrainedArtifact,
    fit,
    load_artifact,
    make_spec,
    save_artifact,
    spec_to_dict,
)

__all__ = [
    "DnnSpec",
    "GboostSpec",
    "KnnSpec",
    "ModelSpec",
    "RfSpec",
    "SvcSpec",
    "TrainedArtifact",
    "fit",
    "load_artifact",
    "make_spec",
    "save_artifact",
    "spec_to_dict",
]
