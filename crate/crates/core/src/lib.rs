//! Cost versus embodied-energy design optimization for one-story masonry
//! buildings.

pub mod canonical;
pub mod materials;
pub mod minlp;
pub mod model;
pub mod nlp;
pub mod pareto;
