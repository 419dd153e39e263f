//! Striding Toom-Cook-4 multiplication in `Z_{2^13}[x] / (x^256 + 1)`.
//!
//! A 256-coefficient operand is split by index modulo 4,
//!
//! ```text
//! A(x) = A0(x^4) + x*A1(x^4) + x^2*A2(x^4) + x^3*A3(x^4)
//! ```
//!
//! so every part lives in `R64 = Z_{2^16}[y] / (y^64 + 1)` with `y = x^4`.
//! Because `y^64 = x^256 = -1`, the seven sub-products are themselves
//! negacyclic and are stored as 64 coefficients instead of 127. The degree-3
//! polynomial in `x` over `R64` is evaluated at `0, 1, -1, 1/2, -1/2, 2, inf`
//! (the half points scaled by 8 to stay integral), multiplied pointwise, and
//! interpolated back with a fixed sequence of adds, shifts and odd-constant
//! multiplications.
//!
//! All arithmetic is mod `2^16`. Interpolation shifts out at most three bits
//! along any dependency chain, so the seven output coefficients are exact
//! mod `2^13` and are returned reduced to that width.

use crate::error::{Error, Result};
use crate::poly::{PolyMatrix, PolyVec, Poly256, N};
use crate::ring::{mask, sign_extend};

/// Length of a strided part.
pub const PART_LEN: usize = 64;
/// Number of evaluation points.
pub const POINTS: usize = 7;
/// Bits of every interpolated coefficient that are exact.
pub const EXACT_BITS: u32 = 13;

/// 64-coefficient vector ops in [`tc4_evaluate`], per operand.
pub const EVAL_VECTOR_OPS: u32 = 17;
/// 64-coefficient vector ops in [`tc4_interpolate`].
pub const INTERP_VECTOR_OPS: u32 = 36;
/// Coefficient multiplications in one [`point_mul`].
pub const POINT_MUL_MACS: u32 = (PART_LEN * PART_LEN) as u32;

// Multiplicative inverses mod 2^16.
const INV3: u16 = 43691;
const INV9: u16 = 36409;
const INV15: u16 = 61167;

/// Element of `Z_{2^16}[y] / (y^64 + 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Poly64 {
    pub coeffs: [u16; PART_LEN],
}

impl Default for Poly64 {
    fn default() -> Self {
        Self::zero()
    }
}

impl Poly64 {
    pub const fn zero() -> Self {
        Self {
            coeffs: [0; PART_LEN],
        }
    }

    pub fn constant(c: u16) -> Self {
        let mut p = Self::zero();
        p.coeffs[0] = c;
        p
    }

    pub fn monomial(k: usize) -> Self {
        let mut p = Self::zero();
        p.coeffs[k] = 1;
        p
    }

    fn zip(&self, other: &Self, f: impl Fn(u16, u16) -> u16) -> Self {
        let mut out = Self::zero();
        for ((o, &a), &b) in out.coeffs.iter_mut().zip(&self.coeffs).zip(&other.coeffs) {
            *o = f(a, b);
        }
        out
    }

    fn map(&self, f: impl Fn(u16) -> u16) -> Self {
        Self {
            coeffs: self.coeffs.map(f),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip(other, u16::wrapping_add)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip(other, u16::wrapping_sub)
    }

    fn shl(&self, s: u32) -> Self {
        self.map(|c| c << s)
    }

    fn shr(&self, s: u32) -> Self {
        self.map(|c| c >> s)
    }

    fn scale(&self, k: u16) -> Self {
        self.map(|c| c.wrapping_mul(k))
    }

    /// True when every coefficient, read as a signed 16-bit value, fits in
    /// an `i8`. This is the condition for the small operand to sit in the
    /// multiplier's 8-bit operand memory.
    pub fn fits_i8(&self) -> bool {
        self.coeffs
            .iter()
            .all(|&c| i8::try_from(c as i16).is_ok())
    }
}

/// The seven evaluations of an operand, or seven accumulated point products.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EvalVec7 {
    pub points: [Poly64; POINTS],
}

impl EvalVec7 {
    /// Adds `ea[p] * eb[p]` into every point.
    pub fn accumulate_products(&mut self, ea: &EvalVec7, eb: &EvalVec7) {
        for ((acc, a), b) in self.points.iter_mut().zip(&ea.points).zip(&eb.points) {
            *acc = acc.add(&point_mul(a, b));
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = *self;
        for (o, p) in out.points.iter_mut().zip(&other.points) {
            *o = o.add(p);
        }
        out
    }
}

/// Splits with stride 4: `part[i][j] = a[4j + i]`. Coefficients are taken
/// as unsigned residues.
pub fn strided_split(a: &Poly256) -> [Poly64; 4] {
    split_with(a, |c| c)
}

/// Like [`strided_split`] but sign-extends each coefficient from the
/// polynomial's width to 16 bits, keeping small secrets small.
pub fn strided_split_signed(a: &Poly256) -> [Poly64; 4] {
    let w = a.width();
    split_with(a, |c| sign_extend(c, w))
}

fn split_with(a: &Poly256, widen: impl Fn(u16) -> u16) -> [Poly64; 4] {
    let mut parts = [Poly64::zero(); 4];
    for (idx, &c) in a.coeffs().iter().enumerate() {
        parts[idx % 4].coeffs[idx / 4] = widen(c);
    }
    parts
}

/// Evaluates `A0 + A1 x + A2 x^2 + A3 x^3` at the seven points, in order
/// `0, 1, -1, 8*(1/2), 8*(-1/2), 2, inf`.
pub fn tc4_evaluate(parts: &[Poly64; 4]) -> EvalVec7 {
    let [a0, a1, a2, a3] = parts;
    let e02 = a0.add(a2);
    let e13 = a1.add(a3);
    // 8*A0 + 2*A2 and 4*A1 + A3
    let h02 = a0.shl(2).add(a2).shl(1);
    let h13 = a1.shl(2).add(a3);
    // Horner for A(2)
    let at2 = a0.add(&a1.add(&a2.add(&a3.shl(1)).shl(1)).shl(1));
    EvalVec7 {
        points: [
            *a0,
            e02.add(&e13),
            e02.sub(&e13),
            h02.add(&h13),
            h02.sub(&h13),
            at2,
            *a3,
        ],
    }
}

/// Negacyclic product in `R64`.
///
/// The conceptual product index `k = i + j` runs over `0..127`. Its low six
/// bits address the output word and bit 6 selects whether the term is
/// complemented before accumulation, since `y^(64 + t) = -y^t`.
pub fn point_mul(a: &Poly64, b: &Poly64) -> Poly64 {
    let mut c = Poly64::zero();
    for (i, &ai) in a.coeffs.iter().enumerate() {
        for (j, &bj) in b.coeffs.iter().enumerate() {
            let k = i + j;
            let addr = k & 0x3F;
            let wrap = ((k >> 6) & 1) as u16;
            // two's complement when wrap = 1: (p ^ 0xFFFF) + 1
            let term = (ai.wrapping_mul(bj) ^ 0u16.wrapping_sub(wrap)).wrapping_add(wrap);
            c.coeffs[addr] = c.coeffs[addr].wrapping_add(term);
        }
    }
    c
}

/// Recovers the seven `R64` coefficients of the degree-6 product from its
/// (possibly accumulated) point values. Outputs are reduced mod `2^13`.
pub fn tc4_interpolate(acc: &EvalVec7) -> [Poly64; POINTS] {
    let [w0, w1, w2, w3, w4, w5, w6] = &acc.points;
    let c0 = *w0;
    let c6 = *w6;

    // s1 = 2(c0 + c2 + c4 + c6), d1 = 2(c1 + c3 + c5)
    // s2 = 2(64c0 + 16c2 + 4c4 + c6), d2 = 4(16c1 + 4c3 + c5)
    let s1 = w1.add(w2);
    let d1 = w1.sub(w2);
    let s2 = w3.add(w4);
    let d2 = w3.sub(w4);

    // Even coefficients. Each >> 1 is exact over the integers; the result is
    // known mod 2^15.
    let e1 = s1.shr(1).sub(&c0).sub(&c6); // c2 + c4
    let e2 = s2.shr(1).sub(&c0.shl(6)).sub(&c6); // 16c2 + 4c4
    // 16e1 - e2 = 12c4: a further >> 2 leaves c4 mod 2^13.
    let c4 = e1.shl(4).sub(&e2).shr(2).scale(INV3);
    let c2 = e1.sub(&c4);

    // Odd coefficients.
    let o1 = d1.shr(1); // c1 + c3 + c5, mod 2^15
    let o2 = d2.shr(2); // 16c1 + 4c3 + c5, mod 2^14
    // w5 - c0 - 4c2 - 16c4 - 64c6 = 2(c1 + 4c3 + 16c5); c2 enters scaled by
    // 4, so the difference is known mod 2^15 and o3 mod 2^14.
    let o3 = w5
        .sub(&c0)
        .sub(&c6.shl(6))
        .sub(&c2.shl(2))
        .sub(&c4.shl(4))
        .shr(1);
    // o2 + o3 = 17(c1 + c5) + 8c3 = 17o1 - 9c3
    let c3 = o1.scale(17).sub(&o2).sub(&o3).scale(INV9);
    let diff15 = o2.sub(&o3).scale(INV15); // c1 - c5
    let sum15 = o1.sub(&c3); // c1 + c5
    // 2c1 known mod 2^14, c1 mod 2^13.
    let c1 = sum15.add(&diff15).shr(1);
    let c5 = sum15.sub(&c1);

    let m = mask(EXACT_BITS);
    [c0, c1, c2, c3, c4, c5, c6].map(|p| p.map(|c| c & m))
}

/// Evaluates `C(x) = sum_k C_k(x^4) x^k` mod `x^256 + 1`, reduced to `width`.
///
/// Terms with `k >= 4` carry an extra factor `y = x^4`, which shifts their
/// part index by one and negates the coefficient that wraps past `y^63`.
pub fn strided_recombine(c: &[Poly64; POINTS], width: u32) -> Result<Poly256> {
    let mut out = [0u16; N];
    for (k, part) in c.iter().enumerate() {
        for (j, &v) in part.coeffs.iter().enumerate() {
            if k < 4 {
                let pos = 4 * j + k;
                out[pos] = out[pos].wrapping_add(v);
            } else {
                let jj = j + 1;
                let pos = 4 * (jj % PART_LEN) + (k - 4);
                out[pos] = if jj == PART_LEN {
                    out[pos].wrapping_sub(v)
                } else {
                    out[pos].wrapping_add(v)
                };
            }
        }
    }
    Poly256::from_coeffs(out, width)
}

fn check_out_width(width: u32) -> Result<()> {
    if width > EXACT_BITS {
        return Err(Error::OutputTooWide(width));
    }
    Ok(())
}

/// Evaluated public operand.
pub fn evaluate_public(a: &Poly256) -> EvalVec7 {
    tc4_evaluate(&strided_split(a))
}

/// Evaluated small (signed) operand.
pub fn evaluate_secret(b: &Poly256) -> EvalVec7 {
    tc4_evaluate(&strided_split_signed(b))
}

/// Single product `a * b` mod `(x^256 + 1, 2^out_width)`.
pub fn multiply(a: &Poly256, b: &Poly256, out_width: u32) -> Result<Poly256> {
    check_out_width(out_width)?;
    let mut acc = EvalVec7::default();
    acc.accumulate_products(&evaluate_public(a), &evaluate_secret(b));
    strided_recombine(&tc4_interpolate(&acc), out_width)
}

/// `sum_i a[i] * b[i]` with lazy interpolation: point products of every pair
/// are accumulated in the evaluated domain and interpolated once.
pub fn inner_product(a: &PolyVec, b: &PolyVec, out_width: u32) -> Result<Poly256> {
    if a.rank() != b.rank() {
        return Err(Error::RankMismatch(a.rank(), b.rank()));
    }
    check_out_width(out_width)?;
    let mut acc = EvalVec7::default();
    for (ai, bi) in a.iter().zip(b.iter()) {
        acc.accumulate_products(&evaluate_public(ai), &evaluate_secret(bi));
    }
    strided_recombine(&tc4_interpolate(&acc), out_width)
}

/// `M s` (or `M^T s`), one lazy inner product per output entry. The small
/// operand is evaluated once per call and reused across rows.
pub fn matrix_vector_mul(
    m: &PolyMatrix,
    s: &PolyVec,
    transpose: bool,
    out_width: u32,
) -> Result<PolyVec> {
    if m.rank() != s.rank() {
        return Err(Error::ShapeMismatch {
            matrix: m.rank(),
            vector: s.rank(),
        });
    }
    check_out_width(out_width)?;
    let s_eval: Vec<EvalVec7> = s.iter().map(evaluate_secret).collect();
    (0..m.rank())
        .map(|i| {
            let mut acc = EvalVec7::default();
            for (j, sj) in s_eval.iter().enumerate() {
                let entry = if transpose { m.get(j, i) } else { m.get(i, j) };
                acc.accumulate_products(&evaluate_public(entry), sj);
            }
            strided_recombine(&tc4_interpolate(&acc), out_width)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::schoolbook_negacyclic;
    use rand::{Rng, SeedableRng};

    fn rng(seed: u64) -> rand::rngs::StdRng {
        rand::rngs::StdRng::seed_from_u64(seed)
    }

    fn random64(rng: &mut impl Rng) -> Poly64 {
        let mut p = Poly64::zero();
        rng.fill(&mut p.coeffs[..]);
        p
    }

    fn random_public(rng: &mut impl Rng) -> Poly256 {
        let mut c = [0u16; N];
        rng.fill(&mut c[..]);
        Poly256::from_coeffs(c, 13).unwrap()
    }

    fn random_secret(rng: &mut impl Rng, bound: i16) -> Poly256 {
        let mut c = [0i16; N];
        c.iter_mut().for_each(|x| *x = rng.gen_range(-bound..=bound));
        Poly256::from_signed(&c, 16).unwrap()
    }

    #[test]
    fn inverses_are_correct() {
        assert_eq!(3u16.wrapping_mul(INV3), 1);
        assert_eq!(9u16.wrapping_mul(INV9), 1);
        assert_eq!(15u16.wrapping_mul(INV15), 1);
    }

    #[test]
    fn split_examples() {
        let parts = strided_split(&Poly256::zero(13).unwrap());
        assert!(parts.iter().all(|p| *p == Poly64::zero()));

        let parts = strided_split(&Poly256::monomial(4, 13).unwrap());
        assert_eq!(parts[0], Poly64::monomial(1));
        assert!(parts[1..].iter().all(|p| *p == Poly64::zero()));

        let mut c = [0u16; N];
        c[3] = 5;
        let parts = strided_split(&Poly256::from_coeffs(c, 13).unwrap());
        assert_eq!(parts[3], Poly64::constant(5));
    }

    #[test]
    fn signed_split_sign_extends() {
        let mut c = [0i16; N];
        c[1] = -3;
        let p = Poly256::from_signed(&c, 13).unwrap();
        assert_eq!(strided_split(&p)[1].coeffs[0], 8189);
        assert_eq!(strided_split_signed(&p)[1].coeffs[0], 0xFFFD);
    }

    #[test]
    fn evaluate_examples() {
        let zero = tc4_evaluate(&[Poly64::zero(); 4]);
        assert_eq!(zero, EvalVec7::default());

        let c = Poly64::constant(7);
        let e = tc4_evaluate(&[c, Poly64::zero(), Poly64::zero(), Poly64::zero()]);
        // unit weight at 0, 1, -1, 2; weight 8 at the scaled half points
        for p in [0, 1, 2, 5] {
            assert_eq!(e.points[p], c);
        }
        assert_eq!(e.points[3], Poly64::constant(56));
        assert_eq!(e.points[4], Poly64::constant(56));
        assert_eq!(e.points[6], Poly64::zero());

        let mut r = rng(5);
        let parts = [0; 4].map(|_| random64(&mut r));
        let e = tc4_evaluate(&parts);
        let sum = parts[0].add(&parts[1]).add(&parts[2]).add(&parts[3]);
        assert_eq!(e.points[1], sum);
    }

    #[test]
    fn evaluation_matches_direct_formula() {
        let mut r = rng(6);
        let parts = [0; 4].map(|_| random64(&mut r));
        let e = tc4_evaluate(&parts);
        // (x, z) homogeneous points: A evaluated as sum a_k x^k z^(3-k)
        let pts: [(i32, i32); 6] = [(0, 1), (1, 1), (-1, 1), (1, 2), (-1, 2), (2, 1)];
        for (p, &(x, z)) in pts.iter().enumerate() {
            for j in 0..PART_LEN {
                let v: i64 = (0..4)
                    .map(|k| {
                        parts[k].coeffs[j] as i64 * (x as i64).pow(k as u32) * (z as i64).pow(3 - k as u32)
                    })
                    .sum();
                assert_eq!(e.points[p].coeffs[j], v.rem_euclid(1 << 16) as u16, "point {p}");
            }
        }
        assert_eq!(e.points[6], parts[3]);
    }

    #[test]
    fn point_mul_examples() {
        let mut r = rng(7);
        let a = random64(&mut r);
        assert_eq!(point_mul(&a, &Poly64::constant(1)), a);
        let y32 = Poly64::monomial(32);
        assert_eq!(point_mul(&y32, &y32), Poly64::constant(0xFFFF));
    }

    #[test]
    fn point_mul_matches_schoolbook() {
        let mut r = rng(8);
        for _ in 0..1000 {
            let a = random64(&mut r);
            let b = random64(&mut r);
            let expect = schoolbook_negacyclic(&a.coeffs, &b.coeffs, 16).unwrap();
            assert_eq!(point_mul(&a, &b).coeffs.to_vec(), expect);
        }
    }

    #[test]
    fn point_products_are_half_size() {
        assert_eq!(std::mem::size_of::<Poly64>(), PART_LEN * 2);
        assert_eq!(2 * PART_LEN - 1, 127);
    }

    #[test]
    fn interpolate_examples() {
        let out = tc4_interpolate(&EvalVec7::default());
        assert!(out.iter().all(|p| *p == Poly64::zero()));

        let one = [Poly64::constant(1), Poly64::zero(), Poly64::zero(), Poly64::zero()];
        let e = tc4_evaluate(&one);
        let mut acc = EvalVec7::default();
        acc.accumulate_products(&e, &e);
        let c = tc4_interpolate(&acc);
        assert_eq!(c[0], Poly64::constant(1));
        assert!(c[1..].iter().all(|p| *p == Poly64::zero()));
    }

    #[test]
    fn interpolation_inverts_evaluation_of_degree_six() {
        // Evaluate a random degree-6 polynomial over R64 at the seven points
        // by the direct formula, then interpolate.
        let mut r = rng(9);
        let coeffs: Vec<Poly64> = (0..7).map(|_| random64(&mut r)).collect();
        let pts: [(i64, i64); 6] = [(0, 1), (1, 1), (-1, 1), (1, 2), (-1, 2), (2, 1)];
        let mut acc = EvalVec7::default();
        for (p, &(x, z)) in pts.iter().enumerate() {
            for j in 0..PART_LEN {
                let v: i64 = (0..7)
                    .map(|k| coeffs[k].coeffs[j] as i64 * x.pow(k as u32) * z.pow(6 - k as u32))
                    .sum();
                acc.points[p].coeffs[j] = v.rem_euclid(1 << 16) as u16;
            }
        }
        acc.points[6] = coeffs[6];
        let out = tc4_interpolate(&acc);
        for k in 0..7 {
            for j in 0..PART_LEN {
                assert_eq!(out[k].coeffs[j], coeffs[k].coeffs[j] & 0x1FFF, "c{k}[{j}]");
            }
        }
    }

    #[test]
    fn recombine_examples() {
        let zero = strided_recombine(&[Poly64::zero(); 7], 13).unwrap();
        assert_eq!(zero, Poly256::zero(13).unwrap());

        let mut c = [Poly64::zero(); 7];
        c[0] = Poly64::constant(1);
        assert_eq!(strided_recombine(&c, 13).unwrap(), Poly256::one(13).unwrap());

        let mut c = [Poly64::zero(); 7];
        c[4] = Poly64::constant(1);
        let got = strided_recombine(&c, 13).unwrap();
        let x2 = Poly256::monomial(2, 13).unwrap();
        assert_eq!(got, x2.mul_schoolbook(&x2, 13).unwrap());
        assert_eq!(got[4], 1);

        // y^63 * y wraps to -1
        let mut c = [Poly64::zero(); 7];
        c[5].coeffs[63] = 1;
        let got = strided_recombine(&c, 13).unwrap();
        assert_eq!(got[1], 8191);
    }

    #[test]
    fn multiply_matches_schoolbook() {
        let mut r = rng(10);
        for _ in 0..100 {
            let a = random_public(&mut r);
            let b = random_secret(&mut r, 5);
            assert_eq!(multiply(&a, &b, 13).unwrap(), a.mul_schoolbook(&b, 13).unwrap());
        }
    }

    #[test]
    fn inner_product_examples() {
        let mut r = rng(11);
        let a: PolyVec = (0..3).map(|_| random_public(&mut r)).collect();
        let b: PolyVec = (0..3).map(|_| random_secret(&mut r, 4)).collect();

        let single = inner_product(
            &PolyVec::new(vec![a[0].clone()]),
            &PolyVec::new(vec![b[0].clone()]),
            13,
        )
        .unwrap();
        assert_eq!(single, a[0].mul_schoolbook(&b[0], 13).unwrap());

        let units: PolyVec = (0..3).map(|_| Poly256::one(16).unwrap()).collect();
        let sum = a[0].add(&a[1]).unwrap().add(&a[2]).unwrap();
        assert_eq!(inner_product(&a, &units, 13).unwrap(), sum);

        let mut expect = Poly256::zero(13).unwrap();
        for i in 0..3 {
            expect = expect.add(&a[i].mul_schoolbook(&b[i], 13).unwrap()).unwrap();
        }
        assert_eq!(inner_product(&a, &b, 13).unwrap(), expect);

        let short = PolyVec::new(vec![a[0].clone()]);
        assert_eq!(inner_product(&short, &b, 13), Err(Error::RankMismatch(1, 3)));
        assert_eq!(inner_product(&a, &b, 16), Err(Error::OutputTooWide(16)));
    }

    #[test]
    fn matrix_vector_examples() {
        let mut r = rng(12);
        let s: PolyVec = (0..3).map(|_| random_secret(&mut r, 4)).collect();
        let mut diag = Vec::new();
        for i in 0..3 {
            for j in 0..3 {
                diag.push(if i == j { Poly256::one(13).unwrap() } else { Poly256::zero(13).unwrap() });
            }
        }
        let id = PolyMatrix::new(3, diag).unwrap();
        let out = matrix_vector_mul(&id, &s, false, 13).unwrap();
        for i in 0..3 {
            assert_eq!(out[i], s[i].reduce_to(13).unwrap());
        }

        let zero = PolyMatrix::new(3, vec![Poly256::zero(13).unwrap(); 9]).unwrap();
        let out = matrix_vector_mul(&zero, &s, true, 13).unwrap();
        assert!(out.iter().all(|p| *p == Poly256::zero(13).unwrap()));

        let m = PolyMatrix::new(3, (0..9).map(|_| random_public(&mut r)).collect()).unwrap();
        for transpose in [false, true] {
            let out = matrix_vector_mul(&m, &s, transpose, 13).unwrap();
            for i in 0..3 {
                let mut expect = Poly256::zero(13).unwrap();
                for j in 0..3 {
                    let e = if transpose { m.get(j, i) } else { m.get(i, j) };
                    expect = expect.add(&e.mul_schoolbook(&s[j], 13).unwrap()).unwrap();
                }
                assert_eq!(out[i], expect);
            }
        }
        let s2 = PolyVec::new(s.entries()[..2].to_vec());
        assert!(matrix_vector_mul(&m, &s2, false, 13).is_err());
    }

    #[test]
    fn small_operand_fits_eight_bits() {
        // |b| <= 5 gives |B(p)| <= 15 * 5 = 75 at every point.
        let mut r = rng(13);
        for _ in 0..50 {
            let e = evaluate_secret(&random_secret(&mut r, 5));
            assert!(e.points.iter().all(Poly64::fits_i8));
        }
    }
}
