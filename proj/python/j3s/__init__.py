"""Joint statistical and spatial sparse representation (J3S)."""

from ._j3s import (
    J3SError,
    J3SParams,
    JointCode,
    JointDictionary,
    PcaTransform,
    assemble_dictionaries,
    build_descriptor,
    decode_fmx1,
    encode_fmx1,
    generate_synthetic,
    learn_unitary,
    pca_apply,
    pca_fit,
    predict,
    project_query,
    read_matrix,
    robust_covariance,
    run_benchmark,
    solve,
    solve_columns,
    spd_logm,
    sym_eig,
    triu_vec,
    write_fmx1,
)

__all__ = [
    "J3SError",
    "J3SParams",
    "JointCode",
    "JointDictionary",
    "PcaTransform",
    "assemble_dictionaries",
    "build_descriptor",
    "decode_fmx1",
    "encode_fmx1",
    "generate_synthetic",
    "learn_unitary",
    "pca_apply",
    "pca_fit",
    "predict",
    "project_query",
    "read_matrix",
    "robust_covariance",
    "run_benchmark",
    "solve",
    "solve_columns",
    "spd_logm",
    "sym_eig",
    "triu_vec",
    "write_fmx1",
]
