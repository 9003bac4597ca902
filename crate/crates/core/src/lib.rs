pub mod matrix;
pub mod model;
pub mod qes;
pub mod sectors;
pub mod spectral;
pub mod oracle;
pub mod cli;
