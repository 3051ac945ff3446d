pub mod graph;
pub mod zoo;
pub mod cost;
pub mod accel;
pub mod submission;
pub mod validator;
pub mod report;
pub mod cli;
