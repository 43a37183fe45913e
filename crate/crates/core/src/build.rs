//! Scheme dispatch from a serializable build description.

use serde::{Deserialize, Serialize};

use crate::construction_a::{self, ConsAOptions, Precoder};
use crate::mbr::{CodeError, CodeInstance, Scheme};
use crate::replication::{self, core_embedded_graph, regular_graph, SimpleGraph};
use crate::{construction_b, pm, rbt};

/// Which `d`-regular graph a replicate build substitutes along.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GraphChoice {
    #[default]
    Circulant,
    /// `K_{d+1}` on the first `d + 1` nodes, circulant on the rest.
    Core,
    /// Explicit 1-based edge list.
    Edges(Vec<(usize, usize)>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildSpec {
    pub scheme: Scheme,
    pub n: usize,
    pub k: usize,
    pub d: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub field_bits: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub precoder: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub phi: Option<Vec<Vec<u64>>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub base: Option<Scheme>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub graph: Option<GraphChoice>,
}

impl BuildSpec {
    /// `d` may be omitted only for rbt, where it is `n - 1`.
    pub fn new(scheme: Scheme, n: usize, k: usize, d: Option<usize>) -> Result<Self, CodeError> {
        let d = match (scheme, d) {
            (_, Some(d)) => d,
            (Scheme::Rbt, None) => n.saturating_sub(1),
            (s, None) => return Err(CodeError::InvalidParams(format!("{s} needs an explicit d"))),
        };
        Ok(BuildSpec { scheme, n, k, d, field_bits: None, precoder: None, phi: None, base: None, graph: None })
    }

    fn cons_a_options(&self) -> Result<ConsAOptions, CodeError> {
        Ok(ConsAOptions {
            field_bits: self.field_bits,
            precoder: self.precoder.as_deref().map(str::parse::<Precoder>).transpose()?,
            phi: self.phi.clone(),
        })
    }

    fn base_spec(&self) -> Result<BuildSpec, CodeError> {
        let base = self.base.unwrap_or(Scheme::Pm);
        if matches!(base, Scheme::ConcatRbt | Scheme::Replicate | Scheme::NearReplicate) {
            return Err(CodeError::InvalidParams(format!("{base} cannot serve as a base code")));
        }
        Ok(BuildSpec { scheme: base, base: None, graph: None, ..self.clone() })
    }

    fn graph(&self) -> Result<SimpleGraph, CodeError> {
        let (n, d) = (self.n, self.d);
        match self.graph.clone().unwrap_or_default() {
            GraphChoice::Circulant => regular_graph(n, d),
            GraphChoice::Core => core_embedded_graph(n, d),
            GraphChoice::Edges(edges) => {
                let zero_based = edges
                    .iter()
                    .map(|&(a, b)| match (a.checked_sub(1), b.checked_sub(1)) {
                        (Some(a), Some(b)) => Ok((a, b)),
                        _ => Err(CodeError::InvalidParams("graph edges are 1-based".into())),
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                let g = SimpleGraph::from_edges(n, &zero_based)?;
                if !g.is_regular(d) {
                    return Err(CodeError::InvalidParams(format!("supplied graph is not {d}-regular")));
                }
                Ok(g)
            }
        }
    }

    fn reject_unused(&self) -> Result<(), CodeError> {
        let s = self.scheme;
        let takes_a = matches!(s, Scheme::ConsA | Scheme::ConcatRbt)
            || (matches!(s, Scheme::Replicate | Scheme::NearReplicate) && self.base == Some(Scheme::ConsA));
        if !takes_a && (self.precoder.is_some() || self.phi.is_some()) {
            return Err(CodeError::InvalidParams(format!("precoder and phi overrides apply to cons-a bases only, not {s}")));
        }
        if !matches!(s, Scheme::Replicate | Scheme::NearReplicate) && self.base.is_some() {
            return Err(CodeError::InvalidParams(format!("{s} does not take a base scheme")));
        }
        if s != Scheme::Replicate && self.graph.is_some() {
            return Err(CodeError::InvalidParams(format!("{s} does not take a graph")));
        }
        Ok(())
    }

    pub fn build(&self) -> Result<CodeInstance, CodeError> {
        self.reject_unused()?;
        let (n, k, d) = (self.n, self.k, self.d);
        match self.scheme {
            Scheme::Pm => pm::build(n, k, d, self.field_bits),
            Scheme::Rbt => rbt::build(n, k, Some(d), self.field_bits),
            Scheme::ConsA => construction_a::build(n, k, d, &self.cons_a_options()?),
            Scheme::ConsB => construction_b::build(n, k, d, self.field_bits),
            Scheme::ConcatRbt => replication::concatenated_rbt(n, k, d, &self.cons_a_options()?),
            Scheme::Replicate => {
                let graph = self.graph()?;
                let base = self.base_spec()?.build()?;
                replication::transform_replicate(&base, &graph)
            }
            Scheme::NearReplicate => {
                if (n * d) % 2 == 0 {
                    return Err(CodeError::Unsupported(format!(
                        "near-replicate requires nd odd (got n={n}, d={d}); use replicate"
                    )));
                }
                let base = self.base_spec()?.build()?;
                replication::near_replicate(&base)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rbt_defaults_degree() {
        let spec = BuildSpec::new(Scheme::Rbt, 5, 2, None).unwrap();
        assert_eq!(spec.d, 4);
        assert_eq!(spec.build().unwrap().params().alpha, 4);
        let wrong = BuildSpec::new(Scheme::Rbt, 5, 2, Some(3)).unwrap();
        let err = wrong.build().unwrap_err().to_string();
        assert!(err.contains("rbt requires d = n-1"), "{err}");
        assert!(BuildSpec::new(Scheme::Pm, 5, 2, None).is_err());
    }

    #[test]
    fn replicate_parity_guard() {
        let err = BuildSpec::new(Scheme::Replicate, 5, 2, Some(3)).unwrap().build().unwrap_err().to_string();
        assert!(err.contains("nd odd; use near-replicate"), "{err}");
        assert!(BuildSpec::new(Scheme::NearReplicate, 5, 2, Some(3)).unwrap().build().is_ok());
        assert!(BuildSpec::new(Scheme::NearReplicate, 6, 2, Some(2)).unwrap().build().is_err());
    }

    #[test]
    fn every_scheme_dispatches() {
        let cases = [
            (Scheme::Pm, 6, 3, 4),
            (Scheme::Rbt, 6, 3, 5),
            (Scheme::ConsA, 6, 2, 2),
            (Scheme::ConsB, 6, 3, 4),
            (Scheme::ConcatRbt, 6, 2, 2),
            (Scheme::Replicate, 6, 3, 4),
            (Scheme::NearReplicate, 7, 2, 3),
        ];
        for (s, n, k, d) in cases {
            let inst = BuildSpec::new(s, n, k, Some(d)).unwrap().build().unwrap();
            assert_eq!(inst.scheme(), s);
        }
    }

    #[test]
    fn overrides_checked() {
        let mut spec = BuildSpec::new(Scheme::Pm, 6, 3, Some(4)).unwrap();
        spec.precoder = Some("gabidulin".into());
        assert!(spec.build().is_err());
        let mut spec = BuildSpec::new(Scheme::Replicate, 6, 2, Some(2)).unwrap();
        spec.base = Some(Scheme::ConsA);
        spec.graph = Some(GraphChoice::Edges(vec![(1, 2), (2, 3), (3, 1), (4, 5), (5, 6), (6, 4)]));
        let inst = spec.build().unwrap();
        assert_eq!(inst.aux().graph.as_ref().unwrap().len(), 6);
        spec.graph = Some(GraphChoice::Edges(vec![(1, 2)]));
        assert!(spec.build().is_err());
    }

    #[test]
    fn spec_json_round_trip() {
        let mut spec = BuildSpec::new(Scheme::Replicate, 8, 2, Some(3)).unwrap();
        spec.base = Some(Scheme::ConsA);
        spec.graph = Some(GraphChoice::Core);
        let text = serde_json::to_string(&spec).unwrap();
        assert_eq!(serde_json::from_str::<BuildSpec>(&text).unwrap(), spec);
    }
}
