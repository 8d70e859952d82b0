//! Query parsing, output formatting and the `gauss-cumulants` command.

pub mod app;
pub mod format;
pub mod query;

pub use app::{run, EXIT_FILE, EXIT_LIMIT, EXIT_OK, EXIT_PARSE};
pub use format::{format_poly, poly_from_json, PolyJson, Style};
pub use query::{parse_query, ParseError, Query};
