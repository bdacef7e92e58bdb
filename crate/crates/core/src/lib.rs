pub mod cli;
pub mod equilibrium;
pub mod expr;
pub mod fta;
pub mod game;
pub mod homology;
pub mod obstruction;
pub mod spaces;
