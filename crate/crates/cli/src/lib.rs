//! Problem-file front end for the variational engine: a chart-aware
//! expression parser, the command surface, and the text/json/latex
//! serializers.

pub mod error;
pub mod parser;
pub mod report;
pub mod run;

pub use error::CliError;
