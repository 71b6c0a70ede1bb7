//! Mechanism file format, result serialization, and the CLI entry point.

pub mod cli;
pub mod expr;
pub mod model_format;
pub mod result_doc;

pub use model_format::{parse_model, Convention, Diagnostic, LoadedModel, ModelDocument};
pub use result_doc::ResultDocument;
