pub mod bounds;
pub mod fidelity;
pub mod simulate;
pub mod temp;

pub use qthermal::sim::advantage::format_float as fmt;
