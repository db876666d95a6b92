//! Matrix-group primitives for products of `SL(n, R)`.

pub mod cartan;
pub mod chamber;
pub mod compact;
pub mod group;
pub mod iwasawa;
pub mod sl2;
pub mod svd;

pub use cartan::{canonical_m_reduce, cartan_decompose, distance, distance_to_origin, CartanTriple};
pub use chamber::{chamber_margin, is_regular, positive_roots, simple_roots, Root, WALL_TOLERANCE};
pub use group::{Factor, GroupElement, GroupSpec};
pub use iwasawa::{iwasawa_decompose, IwasawaTriple};
