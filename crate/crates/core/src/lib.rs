pub mod agents;
pub mod bits;
pub mod bridge;
pub mod env;
pub mod hdl;
pub mod sim;
pub mod tbgen;
pub mod corpus;
pub mod experiment;
