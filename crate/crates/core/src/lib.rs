//! Injective hulls of finite metric spaces, metric trees and exact
//! Gromov–Hausdorff distances, with constructive stability certificates.

pub mod complex;
pub mod experiment;
pub mod extension;
pub mod fixtures;
pub mod gh;
pub mod hull;
pub mod io;
pub mod metric;
pub mod random;
pub mod reproduce;
pub mod tree;
