//! Minimum-bandwidth regenerating codes over binary extension fields.

pub mod build;
pub mod cluster;
pub mod construction_a;
pub mod construction_b;
pub mod exec;
pub mod gabidulin;
pub mod galois;
pub mod manifest;
pub mod matrix;
pub mod mbr;
pub mod pm;
pub mod rbt;
pub mod replication;
pub mod report;
pub mod shard;

pub use build::{BuildSpec, GraphChoice};
pub use cluster::Cluster;
pub use exec::Exec;
pub use galois::{FieldElem, FieldError, FieldSpec};
pub use manifest::Manifest;
pub use matrix::{Mat, MatrixError};
pub use mbr::{CodeError, CodeInstance, MbrParams, RepairPacket, Scheme, VerifyOptions};
