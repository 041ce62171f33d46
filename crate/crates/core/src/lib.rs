pub mod catalog;
pub mod closed_forms;
pub mod detect;
pub mod error;
pub mod hermitian;
pub mod io;
pub mod oracle;
pub mod povm;
pub mod qrac;
pub mod scan;
pub mod tolerance;
