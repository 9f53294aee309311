//! Parameter recovery: grid datasets, per-template autoencoders, the
//! brute-force baseline, end-to-end evaluation and countermeasure benches.

mod branch;
mod brute;
mod countermeasure;
mod dataset;
mod evaluate;
mod model;

pub use branch::{canonicalize, symmetries, Flip};
pub use brute::{recover_params_bf, BfStats};
pub use countermeasure::{
    augment, augmented_templates, bench_countermeasures, layer_sweep, BenchRow, Countermeasure,
    MAX_DUMMY_QUBITS, MAX_EXTRA_LAYERS,
};
pub use dataset::{gen_dataset, grid_values, template_circuit, ParamDataset};
pub use evaluate::{
    align_tags, ensure_models, evaluate, recover, spec_templates, store_summary, wrapped_error_stats,
    EvalConfig, Evaluation, Method, PhaseTimings, Recovery, RecoveryReport,
};
pub use model::{recover_params_ae, train_recovery_model, ModelStore, RecoveryModel};
