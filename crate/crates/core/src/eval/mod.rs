//! Confusion matrix, accuracy, MCC and result-table rules.

mod metrics;
mod report;

pub use metrics::{accuracy, confusion, mcc, ConfusionMatrix};
pub use report::{
    apply_report_rules, by_training_set, emit_table, valid_rows, MetricsReport, Table, TableRow,
};
