pub mod ipca_solver;
pub mod lr_oracle;
pub mod quiver_core;
pub mod random_cert;
pub mod stability_engine;
