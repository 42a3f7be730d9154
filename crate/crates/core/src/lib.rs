pub mod degree;
pub mod domain;
pub mod error;
pub mod factory;
pub mod group;
pub mod linalg;
pub mod local_map;
pub mod numerics;
pub mod perturbation;
pub mod poly;
pub mod quotient_degree;
pub mod stratification;
pub mod theta;
pub mod verify;
pub mod zeros;

pub use error::{Error, Result};
