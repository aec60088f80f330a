pub mod chem;
pub mod eng;
pub mod math;
pub mod phys;
