//! MBR codes with an embedded repair-by-transfer core on the first `d + 1`
//! nodes.
//!
//! The inner code stores the symmetric `d x d` matrix `M` as
//! `[M | diag(M) | M phi_{d+2} | ... | M phi_n]`: nodes `0..d` hold columns
//! of `M`, node `d` holds the diagonal and the remaining nodes hold parity
//! mixes. Symbols of `M` instead of message symbols come from a precoder:
//!
//! | case | precoder | field |
//! |------|----------|-------|
//! | `k = d` | none | `GF(2^s)` |
//! | `k = n - 3`, `d = n - 2` | single parity | `F_2` |
//! | otherwise | systematic Gabidulin | `F_{q^m}`, `m = C(d+1, 2)` |

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use itertools::Itertools;

use crate::gabidulin::{interpolate, subfield_rank, systematic_encode, EvalPoints};
use crate::galois::{FieldElem, FieldSpec};
use crate::matrix::Mat;
use crate::mbr::{CodeError, CodeInstance, MbrParams, Reconstruct, RepairPacket, Scheme, SchemeAux};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Precoder {
    None,
    Gabidulin,
    SingleParity,
}

impl Precoder {
    pub fn tag(self) -> &'static str {
        match self {
            Precoder::None => "none",
            Precoder::Gabidulin => "gabidulin",
            Precoder::SingleParity => "single-parity",
        }
    }
}

impl fmt::Display for Precoder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Precoder {
    type Err = CodeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(Precoder::None),
            "gabidulin" => Ok(Precoder::Gabidulin),
            "single-parity" => Ok(Precoder::SingleParity),
            other => Err(CodeError::InvalidParams(format!(
                "unknown precoder {other:?} (expected none, gabidulin or single-parity)"
            ))),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct ConsAOptions {
    /// Degree `s` of the base field `GF(2^s)`.
    pub field_bits: Option<u32>,
    pub precoder: Option<Precoder>,
    /// Columns `phi_{d+2}..phi_n` as raw base-field values.
    pub phi: Option<Vec<Vec<u64>>>,
}

/// Position of `M[a][b]` (`a <= b`) in the row-major upper triangle.
pub fn triangle_index(d: usize, a: usize, b: usize) -> usize {
    let (a, b) = if a <= b { (a, b) } else { (b, a) };
    // rows before `a` hold d, d-1, ..., d-a+1 entries
    a * d - a * a.saturating_sub(1) / 2 + (b - a)
}

/// Column vectors `phi_{d+2}..phi_n` with the Cauchy points used.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhiColumns {
    pub columns: Vec<Vec<FieldElem>>,
    pub cauchy_x: Vec<FieldElem>,
    pub cauchy_y: Vec<FieldElem>,
}

/// The all-ones column followed by `n - d - 2` Cauchy columns, each scaled so
/// its first entry is 1. Points run `1, 2, 3, ...` with `0` last; the first
/// `d` are row points and the following ones column points.
pub fn default_phi(field: &FieldSpec, n: usize, d: usize) -> Result<PhiColumns, CodeError> {
    let extra = n - d - 2;
    let mut columns = vec![vec![FieldElem::ONE; d]];
    if extra == 0 {
        return Ok(PhiColumns { columns, cauchy_x: Vec::new(), cauchy_y: Vec::new() });
    }
    let order = field.order();
    if order < (d + extra) as u64 {
        return Err(CodeError::FieldTooSmall(format!(
            "parity columns need {} distinct points, GF(2^{}) has {order}",
            d + extra,
            field.base_degree()
        )));
    }
    let points: Vec<FieldElem> = (1..order).chain([0]).take(d + extra).map(FieldElem).collect();
    let (x, y) = points.split_at(d);
    let cauchy = Mat::cauchy(field, x, y)?;
    for c in 0..extra {
        let lead = field.inv(cauchy.get(0, c))?;
        columns.push((0..d).map(|r| field.mul(cauchy.get(r, c), lead)).collect());
    }
    Ok(PhiColumns { columns, cauchy_x: x.to_vec(), cauchy_y: y.to_vec() })
}

/// Every `d`-subset of `{e_1..e_d} + columns` is independent, i.e. every
/// square submatrix of the column block is nonsingular.
pub fn is_superregular(field: &FieldSpec, d: usize, columns: &[Vec<FieldElem>]) -> bool {
    let block = Mat::from_fn(field, d, columns.len(), |r, c| columns[c][r]);
    (1..=d.min(columns.len())).all(|size| {
        (0..d).combinations(size).all(|rows| {
            (0..columns.len()).combinations(size).all(|cols| block.submatrix(&rows, &cols).is_invertible())
        })
    })
}

fn default_base_degree(n: usize, d: usize) -> u32 {
    let extra = n - d - 2;
    if extra == 0 {
        return 1;
    }
    let needed = (n - 2) as u64;
    let mut s = 1;
    while (1u64 << s) < needed {
        s += 1;
    }
    s
}

fn select_precoder(params: &MbrParams, requested: Option<Precoder>) -> Result<Precoder, CodeError> {
    let (n, k, d) = (params.n, params.k, params.d);
    let parity_ok = d + 2 == n && k + 3 == n;
    match requested {
        None if k == d => Ok(Precoder::None),
        None if parity_ok => Ok(Precoder::SingleParity),
        None => Ok(Precoder::Gabidulin),
        Some(Precoder::None) if k != d => {
            Err(CodeError::Unsupported(format!("precoder none requires k = d (got k={k}, d={d})")))
        }
        Some(Precoder::SingleParity) if !parity_ok => Err(CodeError::Unsupported(format!(
            "single-parity precoder requires k = n-3 and d = n-2 (got n={n}, k={k}, d={d})"
        ))),
        Some(p) => Ok(p),
    }
}

/// Inner coefficient matrices: column `r` of entry `i` expresses the `r`-th
/// stored symbol of node `i` over the `C(d+1, 2)` entries of `M`.
fn inner_blocks(base: &FieldSpec, n: usize, d: usize, phi: &[Vec<FieldElem>]) -> Vec<Mat> {
    let nc = d * (d + 1) / 2;
    (0..n)
        .map(|i| {
            let mut g = Mat::zeros(base, nc, d);
            for r in 0..d {
                if i < d {
                    g.set(triangle_index(d, r, i), r, FieldElem::ONE);
                } else if i == d {
                    g.set(triangle_index(d, r, r), r, FieldElem::ONE);
                } else {
                    for (b, &w) in phi[i - d - 1].iter().enumerate() {
                        let t = triangle_index(d, r, b);
                        g.set(t, r, base.add(g.get(t, r), w));
                    }
                }
            }
            g
        })
        .collect()
}

fn embed(field: &FieldSpec, v: &[FieldElem]) -> Vec<FieldElem> {
    // base-field values occupy the first coordinate of the packed form
    v.iter().map(|e| field.base(e.raw() as u16).expect("base element")).collect()
}

fn embed_mat(field: &FieldSpec, m: &Mat) -> Mat {
    Mat::from_fn(field, m.rows(), m.cols(), |r, c| field.base(m.get(r, c).raw() as u16).expect("base element"))
}

struct ConsADecoder {
    field: FieldSpec,
    d: usize,
    b: usize,
    precoder: Precoder,
    /// `phi_i` per node in the composite field; `None` for the diagonal node.
    phi: Vec<Option<Vec<FieldElem>>>,
    inner: Vec<Mat>,
    theta: Option<EvalPoints>,
}

impl ConsADecoder {
    fn node_phi(&self, i: usize) -> &[FieldElem] {
        self.phi[i].as_deref().expect("diagonal node has no phi column")
    }

    fn square(&self, v: &[FieldElem]) -> Vec<FieldElem> {
        v.iter().map(|&e| self.field.square(e)).collect()
    }

    fn repair_vector(&self, helper: usize, failed: usize) -> Vec<FieldElem> {
        if failed == self.d {
            self.node_phi(helper).to_vec()
        } else if helper == self.d {
            self.square(self.node_phi(failed))
        } else {
            self.node_phi(failed).to_vec()
        }
    }

    fn collect_linear(&self, rows: &[(Vec<FieldElem>, FieldElem)]) -> Result<Vec<FieldElem>, CodeError> {
        let nc = self.d * (self.d + 1) / 2;
        let mut coeffs: Vec<Vec<FieldElem>> = rows.iter().map(|(c, _)| c.clone()).collect();
        let mut values: Vec<FieldElem> = rows.iter().map(|(_, v)| *v).collect();
        if self.precoder == Precoder::SingleParity {
            // inner symbols are (m_1..m_B, p) with p the xor of the rest
            coeffs.push(vec![FieldElem::ONE; nc]);
            values.push(FieldElem::ZERO);
        }
        let a = Mat::from_rows(&self.field, &coeffs)?;
        let keep = a.transpose().independent_cols();
        if keep.len() < nc {
            return Err(CodeError::Decode(format!("collected symbols have rank {} < {nc}", keep.len())));
        }
        let sel_vals: Vec<FieldElem> = keep.iter().map(|&r| values[r]).collect();
        let sol = a
            .select_rows(&keep)
            .solve_vec(&sel_vals)
            .map_err(|e| CodeError::Decode(format!("inner solve failed: {e}")))?;
        // consistency of the dropped rows
        if a.mul_vec(&sol)? != values {
            return Err(CodeError::Decode("collected symbols are inconsistent".into()));
        }
        Ok(sol[..self.b].to_vec())
    }

    fn collect_gabidulin(&self, rows: &[(Vec<FieldElem>, FieldElem)]) -> Result<Vec<FieldElem>, CodeError> {
        let theta = self.theta.as_ref().expect("gabidulin decoder carries evaluation points");
        let points: Vec<FieldElem> = rows
            .iter()
            .map(|(c, _)| self.field.dot(c.iter().copied(), theta.points().iter().copied()))
            .collect();
        let total = subfield_rank(&self.field, &points);
        if total < self.b {
            return Err(CodeError::Decode(format!("evaluation points have rank {total} < {} over the base field", self.b)));
        }
        let mut chosen = Vec::with_capacity(self.b);
        let mut chosen_vals = Vec::with_capacity(self.b);
        for (p, (_, v)) in points.iter().zip(rows) {
            if chosen.len() == self.b {
                break;
            }
            chosen.push(*p);
            if subfield_rank(&self.field, &chosen) == chosen.len() {
                chosen_vals.push(*v);
            } else {
                chosen.pop();
            }
        }
        let f = interpolate(&self.field, &chosen, &chosen_vals, self.b - 1)?;
        Ok(theta.points()[..self.b].iter().map(|&t| f.eval(&self.field, t)).collect())
    }
}

impl Reconstruct for ConsADecoder {
    fn repair(&self, failed: usize, packets: &[RepairPacket]) -> Result<Vec<FieldElem>, CodeError> {
        let d = self.d;
        // packet from helper i equals w_i^t y where y is the lost content
        // (M phi_j, or diag(M) when the diagonal node failed)
        let cols: Vec<Vec<FieldElem>> = packets
            .iter()
            .map(|p| {
                if failed == d {
                    self.square(self.node_phi(p.helper))
                } else if p.helper == d {
                    self.node_phi(failed).to_vec()
                } else {
                    self.node_phi(p.helper).to_vec()
                }
            })
            .collect();
        let values: Vec<FieldElem> = packets.iter().map(|p| p.value).collect();
        Mat::from_cols(&self.field, &cols)?
            .transpose()
            .solve_vec(&values)
            .map_err(|e| CodeError::Decode(format!("repair system singular: {e}")))
    }

    fn collect(&self, nodes: &[(usize, &[FieldElem])]) -> Result<Vec<FieldElem>, CodeError> {
        let mut rows = Vec::new();
        let mut unit = BTreeMap::new();
        for &(i, content) in nodes {
            for (r, &v) in content.iter().enumerate() {
                let coef = self.inner[i].col(r);
                if let Some(t) = crate::mbr::standard_basis_index(&coef) {
                    unit.insert(t, v);
                }
                rows.push((coef, v));
            }
        }
        // systematic inner positions cover the message
        if (0..self.b).all(|t| unit.contains_key(&t)) {
            return Ok((0..self.b).map(|t| unit[&t]).collect());
        }
        match self.precoder {
            Precoder::Gabidulin => self.collect_gabidulin(&rows),
            _ => self.collect_linear(&rows),
        }
    }
}

/// Checks `(phi_i . phi_i)^t n_{d+1} = phi_i^t n_i` on generator columns.
pub fn diag_helper_identity(inst: &CodeInstance, i: usize) -> bool {
    let d = inst.params().d;
    if i == d {
        return false;
    }
    let via_diag = inst.packet_functional(d, i);
    let via_node = if i < d {
        inst.block(i).col(i)
    } else {
        match inst.aux().columns.as_ref() {
            Some(cols) => {
                let field = inst.field();
                let phi: Vec<FieldElem> = cols[i - d - 1].iter().map(|&c| field.base(c as u16).expect("base")).collect();
                inst.block(i).mul_vec(&phi).expect("shape")
            }
            None => return false,
        }
    };
    via_diag == via_node
}

pub fn build(n: usize, k: usize, d: usize, opts: &ConsAOptions) -> Result<CodeInstance, CodeError> {
    let params = MbrParams::new(n, k, d)?;
    if d + 2 > n {
        return Err(CodeError::Unsupported(format!("cons-a requires d <= n-2 (got n={n}, d={d})")));
    }
    let precoder = select_precoder(&params, opts.precoder)?;
    let nc = d * (d + 1) / 2;

    let (base, phi) = match &opts.phi {
        Some(raw) => {
            if raw.len() != n - d - 1 || raw.iter().any(|c| c.len() != d) {
                return Err(CodeError::InvalidParams(format!("phi override must have {} columns of length {d}", n - d - 1)));
            }
            let max = raw.iter().flatten().copied().max().unwrap_or(1);
            let s = opts.field_bits.unwrap_or_else(|| (64 - max.leading_zeros()).max(1));
            let base = FieldSpec::binary(s)?;
            let columns = raw
                .iter()
                .map(|c| c.iter().map(|&v| base.elem(v)).collect::<Result<Vec<_>, _>>())
                .collect::<Result<Vec<_>, _>>()?;
            (base, PhiColumns { columns, cauchy_x: Vec::new(), cauchy_y: Vec::new() })
        }
        None => {
            let s = opts.field_bits.unwrap_or_else(|| default_base_degree(n, d));
            let base = FieldSpec::binary(s)?;
            let phi = default_phi(&base, n, d)?;
            (base, phi)
        }
    };
    if n <= 16 && !is_superregular(&base, d, &phi.columns) {
        return Err(CodeError::Invalid("phi columns are not superregular: some d-subset is dependent".into()));
    }

    let field = if precoder == Precoder::Gabidulin {
        let bits = base.base_degree() as usize * nc;
        if bits > 64 {
            return Err(CodeError::Unsupported(format!(
                "Gabidulin precoder needs GF(2^{})^{nc} ({bits} bits), more than the 64-bit element limit",
                base.base_degree()
            )));
        }
        FieldSpec::extension(base.base_degree(), nc as u32)?
    } else {
        base.clone()
    };
    let theta = (precoder == Precoder::Gabidulin).then(|| EvalPoints::polynomial_basis(&field, nc)).transpose()?;

    // B x n_c precoder generator over the composite field
    let pre = match precoder {
        Precoder::None => Mat::identity(&field, nc),
        Precoder::SingleParity => Mat::from_fn(&field, params.b, nc, |r, c| {
            if r == c || c == nc - 1 {
                FieldElem::ONE
            } else {
                FieldElem::ZERO
            }
        }),
        Precoder::Gabidulin => {
            let pts = theta.as_ref().expect("theta");
            let rows = (0..params.b)
                .map(|t| {
                    let mut unit = vec![FieldElem::ZERO; params.b];
                    unit[t] = FieldElem::ONE;
                    systematic_encode(&field, &unit, pts)
                })
                .collect::<Result<Vec<_>, _>>()?;
            Mat::from_rows(&field, &rows)?
        }
    };
    let inner: Vec<Mat> = inner_blocks(&base, n, d, &phi.columns).iter().map(|g| embed_mat(&field, g)).collect();
    let blocks = inner.iter().map(|g| pre.mul(g)).collect::<Result<Vec<_>, _>>()?;

    let mut node_phi: Vec<Option<Vec<FieldElem>>> = (0..d)
        .map(|i| {
            let mut e = vec![FieldElem::ZERO; d];
            e[i] = FieldElem::ONE;
            Some(e)
        })
        .collect();
    node_phi.push(None);
    node_phi.extend(phi.columns.iter().map(|c| Some(embed(&field, c))));

    let decoder = ConsADecoder { field: field.clone(), d, b: params.b, precoder, phi: node_phi, inner, theta };
    let repair = (0..n)
        .cartesian_product(0..n)
        .map(|(i, j)| (i != j).then(|| decoder.repair_vector(i, j)))
        .collect();
    let aux = SchemeAux {
        precoder: Some(precoder.tag().to_string()),
        columns: Some(phi.columns.iter().map(|c| c.iter().map(|e| e.raw()).collect()).collect()),
        cauchy_x: (!phi.cauchy_x.is_empty()).then(|| phi.cauchy_x.iter().map(|e| e.raw()).collect()),
        cauchy_y: (!phi.cauchy_y.is_empty()).then(|| phi.cauchy_y.iter().map(|e| e.raw()).collect()),
        theta: decoder.theta.as_ref().map(|t| t.points().iter().map(|e| e.raw()).collect()),
        ..SchemeAux::default()
    };
    CodeInstance::new(params, field, Scheme::ConsA, blocks, repair, aux, Arc::new(decoder))
}
