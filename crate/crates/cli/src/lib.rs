//! Library surface of the CLI: diagram data and renderers, exposed for
//! golden-file testing.

pub mod diagram;
