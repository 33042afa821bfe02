//! Tabular ingestion, standardization, splits and bag construction.

mod bags;
mod schema;
pub mod synthetic;
mod tabular;

pub use bags::{make_bags, split, Split};
pub use schema::{ColumnRole, ColumnSpec, LabelKind, TabularSchema};
pub use tabular::{
    load_csv, load_matrix_csv, standardize, Encoder, LoadedTable, Standardizer, MISSING_TOKENS,
};
