//! Explicit coordinate models of Legendrian spheres in jet spaces, the flat
//! Weinstein surgery model, open-book page charts, and the isotopy family
//! relating the join and stabilisation constructions, together with a
//! finite-difference engine that certifies the geometric identities each
//! model is supposed to satisfy.

pub mod constructions;
pub mod error;
pub mod grids;
pub mod isotopy;
pub mod jetspace;
pub mod openbook;
pub mod page;
pub mod smooth;
pub mod suites;
pub mod surgery;
pub mod vecops;
pub mod verifier;

pub use error::{Error, Result};
pub use jetspace::{JetPoint, ScalarField, SpherePoint};
pub use surgery::SurgeryPoint;
pub use verifier::{CheckConfig, Report};
