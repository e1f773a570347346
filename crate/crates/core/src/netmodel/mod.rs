//! Static network: admittance assembly, power flow, equilibria and reduction.

pub mod admittance;
pub mod elements;
pub mod kron;
pub mod powerflow;
pub mod steady;

pub use admittance::{build_admittance, AdmittanceSystem, BranchRef, FaultLocation, FaultSpec, Stage};
pub use elements::{evaluate_elements, ElementPowers};
pub use kron::{kron_reduce, partition_blocks, PartitionBlocks, ReducedNetwork};
pub use powerflow::{solve_power_flow, PowerFlowSolution};
pub use steady::{solve_operating_point, solve_steady_state, OperatingPoint, SteadyBaseline};
