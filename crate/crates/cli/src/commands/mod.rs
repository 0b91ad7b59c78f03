pub mod bench;
pub mod compare;
pub mod fit;
pub mod simulate;
