pub mod design;
pub mod harness;
pub mod model;
pub mod numerics;
pub mod propagate;
