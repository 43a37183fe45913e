//! Arithmetic in binary fields `GF(2^s)` and their extensions `GF(q^m)`, `q = 2^s`.
//!
//! Base fields use a fixed table of irreducible polynomials (see
//! [`BASE_POLYNOMIALS`]) so that element encodings are reproducible across
//! implementations. An extension field is represented in polynomial basis
//! over the base field: an element is a vector of `m` base-field coordinates,
//! packed little-endian into a `u64` (coordinate `i` occupies bits
//! `s*i .. s*(i+1)`). The packing limits `s*m` to 64 bits.
//!
//! Keeping the extension explicit (rather than flattening to `GF(2^{sm})`)
//! makes the `q`-power Frobenius map and `F_q`-linearity coordinate-natural,
//! which is what linearized polynomials need.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Irreducible polynomials over `F_2` for base degrees 1..=16, as bit masks
/// including the leading term. Index `s - 1` holds the degree-`s` polynomial.
pub const BASE_POLYNOMIALS: [u32; 16] = [
    0x3,     // x + 1
    0x7,     // x^2 + x + 1
    0xB,     // x^3 + x + 1
    0x13,    // x^4 + x + 1
    0x25,    // x^5 + x^2 + 1
    0x43,    // x^6 + x + 1
    0x83,    // x^7 + x + 1
    0x11B,   // x^8 + x^4 + x^3 + x + 1
    0x211,   // x^9 + x^4 + 1
    0x409,   // x^10 + x^3 + 1
    0x805,   // x^11 + x^2 + 1
    0x1053,  // x^12 + x^6 + x^4 + x + 1
    0x201B,  // x^13 + x^4 + x^3 + x + 1
    0x4443,  // x^14 + x^10 + x^6 + x + 1
    0x8003,  // x^15 + x + 1
    0x1100B, // x^16 + x^12 + x^3 + x + 1
];

/// Maximum number of bits a packed element may occupy.
pub const MAX_ELEMENT_BITS: u32 = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("base degree {0} outside supported range 1..=16")]
    UnsupportedBaseDegree(u32),
    #[error("extension degree must be at least 1")]
    ZeroExtensionDegree,
    #[error("element width {bits} bits exceeds the {max}-bit packing limit")]
    TooWide { bits: u32, max: u32 },
    #[error("extension polynomial must be monic of degree {expected}, got {got} coefficients")]
    BadExtensionPoly { expected: u32, got: usize },
    #[error("extension polynomial coefficient {0:#x} is not a base-field element")]
    ExtensionCoeffOutOfRange(u16),
    #[error("extension polynomial is reducible over the base field")]
    Reducible,
    #[error("value {0:#x} is not an element of this field")]
    NotInField(u64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("no irreducible polynomial of degree {0} found")]
    NoIrreducible(u32),
}

/// A field element: `m` base coordinates packed into a `u64`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct FieldElem(pub u64);

impl FieldElem {
    pub const ZERO: FieldElem = FieldElem(0);
    pub const ONE: FieldElem = FieldElem(1);

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    #[inline]
    pub fn raw(self) -> u64 {
        self.0
    }
}

impl fmt::Debug for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#x}", self.0)
    }
}

impl fmt::Display for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

struct Inner {
    base_degree: u32,
    base_poly: u32,
    ext_degree: u32,
    /// Monic, low-to-high, length `ext_degree + 1`.
    ext_poly: Vec<u16>,
    base_mask: u16,
    log: Vec<u16>,
    exp: Vec<u16>,
}

/// An immutable field description. Cloning is cheap (shared tables).
#[derive(Clone)]
pub struct FieldSpec {
    inner: Arc<Inner>,
}

impl fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "GF(2^{})",
            self.inner.base_degree,
        )?;
        if self.inner.ext_degree > 1 {
            write!(f, "^{} ext {:?}", self.inner.ext_degree, self.inner.ext_poly)?;
        }
        Ok(())
    }
}

impl PartialEq for FieldSpec {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.base_degree == other.inner.base_degree
                && self.inner.base_poly == other.inner.base_poly
                && self.inner.ext_poly == other.inner.ext_poly)
    }
}

impl Eq for FieldSpec {}

fn carryless_mul_mod(mut a: u32, mut b: u32, poly: u32, degree: u32) -> u32 {
    let mut acc = 0u32;
    while b != 0 {
        if b & 1 != 0 {
            acc ^= a;
        }
        b >>= 1;
        a <<= 1;
        if a & (1 << degree) != 0 {
            a ^= poly;
        }
    }
    acc
}

fn build_tables(degree: u32, poly: u32) -> (Vec<u16>, Vec<u16>) {
    let order = 1u32 << degree;
    let group = (order - 1) as usize;
    let mut log = vec![0u16; order as usize];
    let mut exp = vec![0u16; 2 * group.max(1)];
    // The table polynomials need not be primitive; search for a generator.
    for g in 1..order {
        let mut seen = vec![false; order as usize];
        let mut v = 1u32;
        let mut ok = true;
        for slot in exp.iter_mut().take(group) {
            if seen[v as usize] {
                ok = false;
                break;
            }
            seen[v as usize] = true;
            *slot = v as u16;
            v = carryless_mul_mod(v, g, poly, degree);
        }
        if ok && v == 1 {
            for i in 0..group {
                exp[i + group] = exp[i];
                log[exp[i] as usize] = i as u16;
            }
            return (log, exp);
        }
    }
    unreachable!("irreducible polynomial {poly:#x} has no generator")
}

impl FieldSpec {
    /// The base field `GF(2^s)` with the table polynomial.
    pub fn binary(base_degree: u32) -> Result<Self, FieldError> {
        Self::build(base_degree, vec![0, 1])
    }

    /// `GF(q^m)` with `q = 2^s`, using the smallest irreducible extension
    /// polynomial in the deterministic search order of [`find_irreducible`].
    pub fn extension(base_degree: u32, ext_degree: u32) -> Result<Self, FieldError> {
        if ext_degree == 0 {
            return Err(FieldError::ZeroExtensionDegree);
        }
        check_width(base_degree, ext_degree)?;
        if ext_degree == 1 {
            return Self::binary(base_degree);
        }
        let base = Self::binary(base_degree)?;
        let poly = find_irreducible(&base, ext_degree)?;
        Self::build(base_degree, poly)
    }

    /// `GF(q^m)` with an explicit monic extension polynomial (low-to-high).
    pub fn with_ext_poly(base_degree: u32, ext_poly: Vec<u16>) -> Result<Self, FieldError> {
        if ext_poly.len() < 2 {
            return Err(FieldError::ZeroExtensionDegree);
        }
        let m = (ext_poly.len() - 1) as u32;
        check_width(base_degree, m)?;
        if *ext_poly.last().unwrap() != 1 {
            return Err(FieldError::BadExtensionPoly { expected: m, got: ext_poly.len() });
        }
        let base = Self::binary(base_degree)?;
        for &c in &ext_poly {
            if u32::from(c) >= 1u32 << base_degree {
                return Err(FieldError::ExtensionCoeffOutOfRange(c));
            }
        }
        if m > 1 && !is_irreducible(&base, &ext_poly) {
            return Err(FieldError::Reducible);
        }
        Self::build(base_degree, ext_poly)
    }

    fn build(base_degree: u32, ext_poly: Vec<u16>) -> Result<Self, FieldError> {
        if !(1..=16).contains(&base_degree) {
            return Err(FieldError::UnsupportedBaseDegree(base_degree));
        }
        let base_poly = BASE_POLYNOMIALS[(base_degree - 1) as usize];
        let (log, exp) = build_tables(base_degree, base_poly);
        Ok(FieldSpec {
            inner: Arc::new(Inner {
                base_degree,
                base_poly,
                ext_degree: (ext_poly.len() - 1) as u32,
                ext_poly,
                base_mask: ((1u32 << base_degree) - 1) as u16,
                log,
                exp,
            }),
        })
    }

    /// Smallest base field `GF(2^s)` with at least `min_size` elements.
    pub fn smallest_binary(min_size: u64) -> Result<Self, FieldError> {
        let mut s = 1;
        while (1u64 << s) < min_size {
            s += 1;
        }
        Self::binary(s)
    }

    pub fn base_degree(&self) -> u32 {
        self.inner.base_degree
    }

    pub fn base_poly(&self) -> u32 {
        self.inner.base_poly
    }

    pub fn ext_degree(&self) -> u32 {
        self.inner.ext_degree
    }

    pub fn ext_poly(&self) -> &[u16] {
        &self.inner.ext_poly
    }

    /// Bits per packed element, `s * m`.
    pub fn bits(&self) -> u32 {
        self.inner.base_degree * self.inner.ext_degree
    }

    /// Base field size `q`.
    pub fn base_order(&self) -> u64 {
        1u64 << self.inner.base_degree
    }

    /// Field size `q^m` (saturating at `u64::MAX` for 64-bit elements).
    pub fn order(&self) -> u64 {
        if self.bits() >= 64 {
            u64::MAX
        } else {
            1u64 << self.bits()
        }
    }

    pub fn is_extension(&self) -> bool {
        self.inner.ext_degree > 1
    }

    /// The base field `F_q` as a standalone field.
    pub fn base_field(&self) -> FieldSpec {
        if !self.is_extension() {
            return self.clone();
        }
        Self::binary(self.inner.base_degree).expect("base degree already validated")
    }

    fn mask(&self) -> u64 {
        if self.bits() >= 64 {
            u64::MAX
        } else {
            (1u64 << self.bits()) - 1
        }
    }

    pub fn contains(&self, e: FieldElem) -> bool {
        e.0 & !self.mask() == 0
    }

    /// Validates a raw packed value.
    pub fn elem(&self, raw: u64) -> Result<FieldElem, FieldError> {
        let e = FieldElem(raw);
        if self.contains(e) {
            Ok(e)
        } else {
            Err(FieldError::NotInField(raw))
        }
    }

    /// Embeds a base-field value as the constant coordinate.
    pub fn base(&self, c: u16) -> Result<FieldElem, FieldError> {
        if c & !self.inner.base_mask != 0 {
            return Err(FieldError::NotInField(u64::from(c)));
        }
        Ok(FieldElem(u64::from(c)))
    }

    /// True when the element lies in the embedded base field `F_q`.
    pub fn is_base(&self, e: FieldElem) -> bool {
        e.0 >> self.inner.base_degree == 0
    }

    pub fn coords(&self, e: FieldElem) -> Vec<u16> {
        (0..self.inner.ext_degree).map(|i| self.coord(e, i)).collect()
    }

    #[inline]
    fn coord(&self, e: FieldElem, i: u32) -> u16 {
        ((e.0 >> (self.inner.base_degree * i)) as u16) & self.inner.base_mask
    }

    pub fn from_coords(&self, coords: &[u16]) -> Result<FieldElem, FieldError> {
        if coords.len() != self.inner.ext_degree as usize {
            return Err(FieldError::BadExtensionPoly {
                expected: self.inner.ext_degree,
                got: coords.len(),
            });
        }
        let mut raw = 0u64;
        for (i, &c) in coords.iter().enumerate() {
            if c & !self.inner.base_mask != 0 {
                return Err(FieldError::NotInField(u64::from(c)));
            }
            raw |= u64::from(c) << (self.inner.base_degree * i as u32);
        }
        Ok(FieldElem(raw))
    }

    /// The polynomial-basis element `x^i` of the extension.
    pub fn basis(&self, i: u32) -> FieldElem {
        assert!(i < self.inner.ext_degree, "basis index out of range");
        FieldElem(1u64 << (self.inner.base_degree * i))
    }

    /// All field elements in representation order; only for small fields.
    pub fn elements(&self) -> impl Iterator<Item = FieldElem> {
        assert!(self.bits() <= 24, "refusing to enumerate a field with 2^{} elements", self.bits());
        (0..self.order()).map(FieldElem)
    }

    #[inline]
    pub fn add(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        FieldElem(a.0 ^ b.0)
    }

    #[inline]
    fn base_mul(&self, a: u16, b: u16) -> u16 {
        if a == 0 || b == 0 {
            return 0;
        }
        let inner = &*self.inner;
        inner.exp[inner.log[a as usize] as usize + inner.log[b as usize] as usize]
    }

    #[inline]
    fn base_inv(&self, a: u16) -> u16 {
        let inner = &*self.inner;
        let group = inner.exp.len() / 2;
        inner.exp[(group - inner.log[a as usize] as usize) % group]
    }

    pub fn mul(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        if a.0 == 0 || b.0 == 0 {
            return FieldElem::ZERO;
        }
        let m = self.inner.ext_degree as usize;
        if m == 1 {
            return FieldElem(u64::from(self.base_mul(a.0 as u16, b.0 as u16)));
        }
        let mut ca = [0u16; 64];
        let mut cb = [0u16; 64];
        for i in 0..m {
            ca[i] = self.coord(a, i as u32);
            cb[i] = self.coord(b, i as u32);
        }
        let mut prod = [0u16; 128];
        for i in 0..m {
            if ca[i] == 0 {
                continue;
            }
            for j in 0..m {
                prod[i + j] ^= self.base_mul(ca[i], cb[j]);
            }
        }
        let poly = &self.inner.ext_poly;
        for deg in (m..2 * m - 1).rev() {
            let c = prod[deg];
            if c == 0 {
                continue;
            }
            prod[deg] = 0;
            for t in 0..m {
                prod[deg - m + t] ^= self.base_mul(c, poly[t]);
            }
        }
        let mut raw = 0u64;
        for (i, &c) in prod.iter().enumerate().take(m) {
            raw |= u64::from(c) << (self.inner.base_degree * i as u32);
        }
        FieldElem(raw)
    }

    #[inline]
    pub fn square(&self, a: FieldElem) -> FieldElem {
        self.mul(a, a)
    }

    pub fn pow(&self, mut a: FieldElem, mut e: u64) -> FieldElem {
        let mut acc = FieldElem::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, a);
            }
            a = self.square(a);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: FieldElem) -> Result<FieldElem, FieldError> {
        if a.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        if self.inner.ext_degree == 1 {
            return Ok(FieldElem(u64::from(self.base_inv(a.0 as u16))));
        }
        // a^(2^N - 2) = prod_{j=1}^{N-1} a^(2^j)
        let mut x = a;
        let mut acc = FieldElem::ONE;
        for _ in 1..self.bits() {
            x = self.square(x);
            acc = self.mul(acc, x);
        }
        Ok(acc)
    }

    pub fn div(&self, a: FieldElem, b: FieldElem) -> Result<FieldElem, FieldError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// `a^(q^i)`; periodic in `i` with period `m`.
    pub fn frobenius(&self, a: FieldElem, i: u64) -> FieldElem {
        let squarings = u64::from(self.inner.base_degree) * (i % u64::from(self.inner.ext_degree));
        let mut x = a;
        for _ in 0..squarings {
            x = self.square(x);
        }
        x
    }

    /// Sum of products, the inner loop of every matrix routine here.
    pub fn dot(&self, a: impl IntoIterator<Item = FieldElem>, b: impl IntoIterator<Item = FieldElem>) -> FieldElem {
        a.into_iter()
            .zip(b)
            .fold(FieldElem::ZERO, |acc, (x, y)| self.add(acc, self.mul(x, y)))
    }
}

fn check_width(base_degree: u32, ext_degree: u32) -> Result<(), FieldError> {
    if !(1..=16).contains(&base_degree) {
        return Err(FieldError::UnsupportedBaseDegree(base_degree));
    }
    let bits = base_degree * ext_degree;
    if bits > MAX_ELEMENT_BITS {
        return Err(FieldError::TooWide { bits, max: MAX_ELEMENT_BITS });
    }
    Ok(())
}

// Dense polynomials over the base field, low-to-high, used only for the
// irreducibility test of extension polynomials.
mod poly {
    use super::FieldSpec;

    pub fn trim(p: &mut Vec<u16>) {
        while p.len() > 1 && *p.last().unwrap() == 0 {
            p.pop();
        }
    }

    pub fn is_zero(p: &[u16]) -> bool {
        p.iter().all(|&c| c == 0)
    }

    pub fn rem(base: &FieldSpec, a: &[u16], m: &[u16]) -> Vec<u16> {
        let mut r = a.to_vec();
        trim(&mut r);
        let dm = m.len() - 1;
        let lead_inv = base.base_inv(m[dm]);
        while r.len() > dm && !is_zero(&r) {
            let dr = r.len() - 1;
            let c = base.base_mul(r[dr], lead_inv);
            for t in 0..=dm {
                r[dr - dm + t] ^= base.base_mul(c, m[t]);
            }
            trim(&mut r);
        }
        r
    }

    pub fn mul_mod(base: &FieldSpec, a: &[u16], b: &[u16], m: &[u16]) -> Vec<u16> {
        let mut prod = vec![0u16; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                prod[i + j] ^= base.base_mul(x, y);
            }
        }
        rem(base, &prod, m)
    }

    pub fn gcd(base: &FieldSpec, a: &[u16], b: &[u16]) -> Vec<u16> {
        let mut a = a.to_vec();
        let mut b = b.to_vec();
        trim(&mut a);
        trim(&mut b);
        while !is_zero(&b) {
            let r = rem(base, &a, &b);
            a = b;
            b = r;
        }
        a
    }
}

/// Irreducibility over `F_q`: no roots in `F_q`, and
/// `gcd(x^{q^i} - x mod f, f) = 1` for every `i <= m/2`.
pub fn is_irreducible(base: &FieldSpec, f: &[u16]) -> bool {
    let m = f.len() - 1;
    if m == 0 {
        return false;
    }
    if m == 1 {
        return true;
    }
    let q = 1u32 << base.base_degree();
    for r in 0..q as u16 {
        // Horner evaluation
        let v = f.iter().rev().fold(0u16, |acc, &c| base.base_mul(acc, r) ^ c);
        if v == 0 {
            return false;
        }
    }
    let mut xp = vec![0u16, 1];
    for _ in 1..=m / 2 {
        for _ in 0..base.base_degree() {
            xp = poly::mul_mod(base, &xp, &xp, f);
        }
        let mut diff = xp.clone();
        if diff.len() < 2 {
            diff.resize(2, 0);
        }
        diff[1] ^= 1;
        poly::trim(&mut diff);
        if poly::is_zero(&diff) {
            return false;
        }
        let g = poly::gcd(base, f, &diff);
        if g.len() > 1 {
            return false;
        }
    }
    true
}

/// First monic irreducible polynomial of degree `m` over `base`, enumerating
/// the low coefficients `c_0 .. c_{m-1}` as base-`q` digits in increasing order.
pub fn find_irreducible(base: &FieldSpec, m: u32) -> Result<Vec<u16>, FieldError> {
    let q = base.base_order();
    let limit = q.checked_pow(m).unwrap_or(u64::MAX);
    for code in 1..limit {
        let mut f = Vec::with_capacity(m as usize + 1);
        let mut c = code;
        for _ in 0..m {
            f.push((c % q) as u16);
            c /= q;
        }
        if f[0] == 0 {
            continue;
        }
        f.push(1);
        if is_irreducible(base, &f) {
            return Ok(f);
        }
    }
    Err(FieldError::NoIrreducible(m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn gf4() -> FieldSpec {
        FieldSpec::binary(2).unwrap()
    }

    /// Independent oracle: plain shift-and-add multiply modulo `poly`.
    fn oracle_mul(a: u32, b: u32, poly: u32, degree: u32) -> u32 {
        let mut wide = 0u64;
        for i in 0..degree {
            if b >> i & 1 == 1 {
                wide ^= u64::from(a) << i;
            }
        }
        for bit in (degree..2 * degree).rev() {
            if wide >> bit & 1 == 1 {
                wide ^= u64::from(poly) << (bit - degree);
            }
        }
        wide as u32
    }

    #[test]
    fn gf4_small_values() {
        let f = gf4();
        let e = |v| FieldElem(v);
        assert_eq!(f.add(e(1), e(2)), e(3));
        assert_eq!(f.mul(e(2), e(2)), e(3));
        assert_eq!(f.mul(e(2), e(3)), e(1));
        assert_eq!(f.inv(e(2)).unwrap(), e(3));
        assert_eq!(f.inv(e(1)).unwrap(), e(1));
        assert_eq!(oracle_mul(2, 2, 0x7, 2), 3);
        assert_eq!(oracle_mul(2, 3, 0x7, 2), 1);
    }

    #[test]
    fn gf2_inverse_and_zero() {
        let f = FieldSpec::binary(1).unwrap();
        assert_eq!(f.inv(FieldElem::ONE).unwrap(), FieldElem::ONE);
        assert_eq!(f.inv(FieldElem::ZERO), Err(FieldError::DivisionByZero));
        assert_eq!(f.mul(FieldElem::ONE, FieldElem::ONE), FieldElem::ONE);
    }

    #[test]
    fn add_identities() {
        let f = FieldSpec::extension(3, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let a = FieldElem(rng.gen::<u64>() & (f.order() - 1));
            assert_eq!(f.add(a, a), FieldElem::ZERO);
            assert_eq!(f.add(a, FieldElem::ZERO), a);
            assert_eq!(f.mul(a, FieldElem::ONE), a);
        }
    }

    #[test]
    fn base_table_polynomials_are_irreducible() {
        let gf2 = FieldSpec::binary(1).unwrap();
        for (i, &p) in BASE_POLYNOMIALS.iter().enumerate() {
            let coeffs: Vec<u16> = (0..=i + 1).map(|b| ((p >> b) & 1) as u16).collect();
            assert!(is_irreducible(&gf2, &coeffs), "degree {}", i + 1);
        }
    }

    #[test]
    fn base_mul_matches_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for s in 1..=16u32 {
            let f = FieldSpec::binary(s).unwrap();
            let poly = BASE_POLYNOMIALS[(s - 1) as usize];
            for _ in 0..500 {
                let a = rng.gen_range(0..1u32 << s);
                let b = rng.gen_range(0..1u32 << s);
                assert_eq!(
                    f.mul(FieldElem(a.into()), FieldElem(b.into())).0,
                    u64::from(oracle_mul(a, b, poly, s)),
                    "s={s} a={a} b={b}"
                );
            }
        }
    }

    #[test]
    fn exhaustive_inverses_up_to_2_16() {
        for f in [
            FieldSpec::binary(8).unwrap(),
            FieldSpec::binary(16).unwrap(),
            FieldSpec::extension(2, 4).unwrap(),
            FieldSpec::extension(1, 12).unwrap(),
            FieldSpec::extension(4, 4).unwrap(),
        ] {
            for a in f.elements().skip(1) {
                let inv = f.inv(a).unwrap();
                assert_eq!(f.mul(a, inv), FieldElem::ONE, "{f:?} a={a:?}");
            }
        }
    }

    #[test]
    fn field_axioms_on_random_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for f in [
            FieldSpec::binary(8).unwrap(),
            FieldSpec::extension(3, 10).unwrap(),
            FieldSpec::extension(2, 7).unwrap(),
            FieldSpec::extension(1, 64).unwrap(),
        ] {
            let mask = if f.bits() == 64 { u64::MAX } else { f.order() - 1 };
            for _ in 0..10_000 {
                let a = FieldElem(rng.gen::<u64>() & mask);
                let b = FieldElem(rng.gen::<u64>() & mask);
                let c = FieldElem(rng.gen::<u64>() & mask);
                assert_eq!(f.mul(a, b), f.mul(b, a));
                assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
            }
        }
    }

    #[test]
    fn frobenius_examples_and_period() {
        // GF(4) viewed as a degree-2 extension of GF(2).
        let f = FieldSpec::extension(1, 2).unwrap();
        assert_eq!(f.ext_poly(), &[1, 1, 1]);
        let two = FieldElem(2);
        assert_eq!(f.frobenius(two, 1), FieldElem(3));
        assert_eq!(f.frobenius(two, 1), f.mul(two, two));
        let g = FieldSpec::extension(3, 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..200 {
            let a = FieldElem(rng.gen::<u64>() & (g.order() - 1));
            assert_eq!(g.frobenius(a, 0), a);
            assert_eq!(g.frobenius(a, 5), a);
            assert_eq!(g.frobenius(a, 2), g.pow(a, 64));
        }
    }

    #[test]
    fn frobenius_is_fq_linear() {
        let f = FieldSpec::extension(2, 6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..500 {
            let a = FieldElem(rng.gen::<u64>() & (f.order() - 1));
            let b = FieldElem(rng.gen::<u64>() & (f.order() - 1));
            let c = f.base(rng.gen_range(0..4)).unwrap();
            for i in 0..6 {
                assert_eq!(f.frobenius(f.add(a, b), i), f.add(f.frobenius(a, i), f.frobenius(b, i)));
                assert_eq!(f.frobenius(f.mul(c, a), i), f.mul(c, f.frobenius(a, i)));
            }
        }
    }

    #[test]
    fn rejects_bad_specs() {
        assert_eq!(FieldSpec::binary(0).unwrap_err(), FieldError::UnsupportedBaseDegree(0));
        assert_eq!(FieldSpec::binary(17).unwrap_err(), FieldError::UnsupportedBaseDegree(17));
        assert!(matches!(FieldSpec::extension(8, 9), Err(FieldError::TooWide { .. })));
        // x^2 + 1 = (x + 1)^2 over GF(2)
        assert_eq!(FieldSpec::with_ext_poly(1, vec![1, 0, 1]).unwrap_err(), FieldError::Reducible);
        // (x^2 + x + 1)^2 has no roots but fails the gcd test
        assert_eq!(FieldSpec::with_ext_poly(1, vec![1, 0, 1, 0, 1]).unwrap_err(), FieldError::Reducible);
        let f = gf4();
        assert_eq!(f.elem(4), Err(FieldError::NotInField(4)));
        assert!(f.elem(3).is_ok());
    }

    #[test]
    fn coords_round_trip() {
        let f = FieldSpec::extension(3, 4).unwrap();
        let e = f.from_coords(&[1, 7, 0, 5]).unwrap();
        assert_eq!(f.coords(e), vec![1, 7, 0, 5]);
        assert_eq!(f.basis(2), f.from_coords(&[0, 0, 1, 0]).unwrap());
        assert!(f.is_base(f.base(6).unwrap()));
        assert!(!f.is_base(f.basis(1)));
    }
}
