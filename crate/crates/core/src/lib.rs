//! Core of the semantic crowd map platform.
//!
//! The [`rdf`] store holds all platform state; [`turtle`] and [`sparql`]
//! are its exchange and query faces. [`kb`] is the common-sense inferential
//! graph used to characterize marker types, [`ontology`] materializes crowd
//! maps, concept classes and markers as triples, [`rdb2rdf`] maps tabular
//! data into the store and [`lod`] answers viewport-scoped linked-data searches.

pub mod geo;
pub mod kb;
pub mod lod;
pub mod ontology;
pub mod platform;
pub mod rdb2rdf;
pub mod rdf;
pub mod sparql;
pub mod text;
pub mod turtle;
pub mod vocab;
