//! Finite-field subspace arithmetic and constructions of subspace designs.

pub mod atlas;
pub mod design;
pub mod error;
pub mod field;
pub mod gl;
pub mod incidence;
pub mod io;
pub mod km;
pub mod linalg;
pub mod singer;
pub mod space;
pub mod subspace;
pub mod tower;

pub use atlas::{Atlas, OmegaClass, OrbitLabel, TRepresentative};
pub use design::{DesignInstance, GddSelection, Kind, Mode, VerifyReport};
pub use error::{Error, Result};
pub use field::{gf, Elem, Field};
pub use incidence::IncidenceBlockMatrix;
pub use singer::{HOrbit, SingerAction};
pub use space::Space;
pub use subspace::{enumerate_subspaces, gaussian_binomial, superspaces, Subspace};
pub use tower::{build_tower, FieldTower};
