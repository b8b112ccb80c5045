//! Project storage, batch stages and the HTTP API of the annotation service.

pub mod api;
pub mod project;
pub mod stages;

pub use api::{router, serve, AppState};
pub use project::{Project, ProjectError, Store};
pub use stages::{AnalysisLayer, JobReport};
