//! Experiment runner: sweeps over (N_PE, T) with optional train/test
//! mismatch, uncoded and LDPC-coded evaluation, and CSV output.
//!
//! Seeding: every random stream is `derive_seed(master, path)`. Training
//! streams are keyed by `(stream, N_PE^train, T^train bits, label-rate bits)`
//! so a receiver is shared by all points that train at the same place; test
//! streams are keyed by `(stream, point index, trial)`. See [`stream`].

mod coded;
mod figures;
mod mi;
mod output;
mod receiver;
mod spec;
mod uncoded;

pub use coded::{
    rnna_quantizer, rnna_widths, run_coded, run_coded_with, simulate_frames, CodedLink,
    FrameCounts, FrameReport, LlrQuantizer, WidthRow, CODED_QUANTIZERS,
};
pub use figures::{
    content_hash, run_figure, run_figure_config, FigureConfig, Manifest, FIGURE_TAGS,
};
pub use mi::{mi_curve, MiRow};
pub use output::{write_rows, write_wide, ResultRow, RunOutput, TimingRow};
pub use receiver::{rnna_detect, stream, train_receiver, Receiver, ReceiverCache, ReceiverKey};
pub use spec::{CodePreset, CodedSettings, ExperimentSpec, Mismatch, StoppingRule, SweepPoint};
pub use uncoded::{run_uncoded, run_uncoded_with, UNCODED_DETECTORS};
