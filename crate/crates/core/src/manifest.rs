//! JSON manifests: everything needed to rebuild a code instance exactly.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::build::BuildSpec;
use crate::galois::FieldSpec;
use crate::mbr::{CodeError, CodeInstance, SchemeAux};

pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("manifest I/O on {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed manifest: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported manifest version {0}")]
    Version(u32),
    #[error("rebuilt instance does not match manifest: {0}")]
    Mismatch(String),
    #[error(transparent)]
    Code(#[from] CodeError),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldInfo {
    pub base_degree: u32,
    pub base_poly: u32,
    pub ext_degree: u32,
    /// Monic extension polynomial coefficients, constant term first; empty
    /// for a prime-power base field.
    pub ext_poly: Vec<u16>,
    pub order_bits: u32,
}

impl FieldInfo {
    pub fn of(field: &FieldSpec) -> Self {
        FieldInfo {
            base_degree: field.base_degree(),
            base_poly: field.base_poly(),
            ext_degree: field.ext_degree(),
            ext_poly: if field.is_extension() { field.ext_poly().to_vec() } else { Vec::new() },
            order_bits: field.bits(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: u32,
    pub build: BuildSpec,
    pub n: usize,
    pub k: usize,
    pub d: usize,
    pub alpha: usize,
    pub b: usize,
    pub field: FieldInfo,
    pub aux: SchemeAux,
    /// Input length in bytes; set once a file has been encoded.
    #[serde(default)]
    pub payload_len: Option<u64>,
    pub symbol_bits: u32,
    pub generator_sha256: String,
}

/// SHA-256 over the dimensions and every generator entry, little-endian.
pub fn generator_digest(inst: &CodeInstance) -> String {
    let p = inst.params();
    let mut h = Sha256::new();
    for v in [p.n, p.k, p.d, p.alpha, p.b] {
        h.update((v as u64).to_le_bytes());
    }
    for block in inst.blocks() {
        for e in block.entries() {
            h.update(e.raw().to_le_bytes());
        }
    }
    hex::encode(h.finalize())
}

impl Manifest {
    pub fn new(spec: &BuildSpec, inst: &CodeInstance) -> Self {
        let p = inst.params();
        Manifest {
            version: MANIFEST_VERSION,
            build: spec.clone(),
            n: p.n,
            k: p.k,
            d: p.d,
            alpha: p.alpha,
            b: p.b,
            field: FieldInfo::of(inst.field()),
            aux: inst.aux().clone(),
            payload_len: None,
            symbol_bits: inst.field().bits(),
            generator_sha256: generator_digest(inst),
        }
    }

    pub fn build(spec: &BuildSpec) -> Result<(Manifest, CodeInstance), ManifestError> {
        let inst = spec.build()?;
        Ok((Manifest::new(spec, &inst), inst))
    }

    /// Rebuilds the instance and checks it against the recorded field and
    /// digest.
    pub fn rebuild(&self) -> Result<CodeInstance, ManifestError> {
        if self.version != MANIFEST_VERSION {
            return Err(ManifestError::Version(self.version));
        }
        let inst = self.build.build()?;
        let p = inst.params();
        if (p.n, p.k, p.d, p.alpha, p.b) != (self.n, self.k, self.d, self.alpha, self.b) {
            return Err(ManifestError::Mismatch("parameters differ".into()));
        }
        if FieldInfo::of(inst.field()) != self.field {
            return Err(ManifestError::Mismatch("field description differs".into()));
        }
        if inst.field().bits() != self.symbol_bits {
            return Err(ManifestError::Mismatch("symbol width differs".into()));
        }
        let digest = generator_digest(&inst);
        if digest != self.generator_sha256 {
            return Err(ManifestError::Mismatch(format!(
                "generator digest {digest} != recorded {}",
                self.generator_sha256
            )));
        }
        Ok(inst)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, ManifestError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn save(&self, path: &Path) -> Result<(), ManifestError> {
        fs::write(path, self.to_json() + "\n").map_err(|source| ManifestError::Io { path: path.display().to_string(), source })
    }

    pub fn load(path: &Path) -> Result<Self, ManifestError> {
        let text =
            fs::read_to_string(path).map_err(|source| ManifestError::Io { path: path.display().to_string(), source })?;
        Manifest::from_json(&text)
    }
}
