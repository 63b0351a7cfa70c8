pub mod domain;
pub mod facts;
pub mod geometry;
pub mod map;
pub mod osc;
pub mod reasoner;
pub mod rules;
