//! Measurement-type aware analysis of mixed (heterogeneous) tabular data.
//!
//! The crate is `no_std` (it needs `alloc`) and contains no IO. It covers:
//!
//! - [`model`]: measurement scales, typed values, datasets and the permission
//!   guard that decides which relations are meaningful for which scale.
//! - [`scheme`]: coding schemes (grouping, interval groups, explicit codes),
//!   applying them to raw text tables, normalization.
//! - [`encode`]: numeric encoders for non-numeric attributes.
//! - [`hyperblock`]: numeric, ordinal, nominal and mixed hyperblocks and
//!   pure-hyperblock discovery.
//! - [`rules`]: logical rules over attribute tests, their validation,
//!   evaluation and threshold elimination.
//! - [`layout`]: frequency and reference-frequency bars for parallel
//!   coordinates, purity filtering, sorting, edges and linguistic reports.
//! - [`render`]: deterministic SVG output.
//! - [`view`]: the layout pipeline shared by the CLI and the HTTP service.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod encode;
pub mod error;
pub mod hyperblock;
pub mod layout;
pub mod model;
pub mod render;
pub mod rules;
pub mod scheme;
pub mod view;

mod fmt;

pub use error::{Error, Result};
pub use model::{
    Attribute, AttributeHierarchy, Dataset, HierarchyNode, MeasurementType, RelationKind,
    RelationSet, Value,
};
