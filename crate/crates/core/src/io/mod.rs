//! Files in and out: matrices, labels, manifests, run records, and the
//! synthetic dataset generator.
//!
//! Experiment outputs follow `data/<dataset>/manifest.json`,
//! `results/<experiment>/records.jsonl` and `results/<experiment>/table.csv`.

mod manifest;
mod matrix;
mod records;
mod synthetic;

pub use manifest::{load_manifest, parse_manifest, save_manifest, DatasetManifest, ViewEntry, ViewSource};
pub use matrix::{
    decode_csv, decode_matrix, decode_mvk1, encode_csv, encode_mvk1, matrix_shape, read_labels, read_matrix,
    write_labels, write_matrix, MVK1_MAGIC,
};
pub use records::{append_record, read_records, RunRecord};
pub use synthetic::make_synthetic;
