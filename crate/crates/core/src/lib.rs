//! Exact computations for affine monoids, truncated power series rings and
//! Frobenius towers over `F_p`, with their tilts and class groups.

pub mod classgroup;
pub mod coeffring;
pub mod cone;
pub mod fixtures;
pub mod intlat;
pub mod logreg;
pub mod monoid;
pub mod series;
pub mod tower;

pub use classgroup::{class_group, ClassGroupReport};
pub use coeffring::{PrimeFieldElem, TruncatedWittCoeff, Witt2Elem};
pub use intlat::{FinAbelianGroup, IntMatrix, Lattice};
pub use logreg::{BaseElem, BaseRing, LogRegPresentation};
pub use monoid::{AffineMonoid, MonoidDescriptor, MonoidElem};
pub use series::{Cutoff, Series, SeriesRing, SeriesRingDesc};
pub use tower::{AxiomReport, TiltElem, Tower, TowerDesc};
