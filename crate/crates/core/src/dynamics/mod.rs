//! Hamiltonians, lifted vector fields and time integration.

pub mod fields;
pub mod hamiltonian;
pub mod integrate;
pub mod state;
pub mod trajectory;

pub use fields::{
    hagedorn_rhs, heller_rhs, lifted_hamiltonian, reduced_hamiltonian, vector_field_frame, vector_field_reduced,
    HagedornDerivative, HellerDerivative,
};
pub use hamiltonian::{HamiltonianSpec, Monomial, Polynomial};
pub use integrate::{integrate, Evolvable, IntegrationConfig, QuadraticPropagator, Scheme};
pub use state::{FrameState, HagedornState, HellerState, ReducedState};
pub use trajectory::{Checkpoint, Diagnostics, Trajectory};
