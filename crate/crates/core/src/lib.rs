pub mod certify;
pub mod cli;
pub mod commutative;
pub mod estimate;
pub mod freealg;
pub mod linalg;
pub mod morphism;
pub mod peel;
pub mod scalar;
pub mod tensor;
pub mod text;
