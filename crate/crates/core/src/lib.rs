pub mod cli;
pub mod diagram;
pub mod entropy;
pub mod interval;
pub mod interval_map;
pub mod irregular;
pub mod linalg;
pub mod measures;
pub mod scalar;
pub mod symbolic;
