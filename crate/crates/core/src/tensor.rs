//! Truncated tensor algebra over `R^width`, cut at a run-time depth.
//!
//! Level `k` is stored densely in row-major word order: the word
//! `(i_1, ..., i_k)` (letters are 0-based) lives at index
//! `sum_j i_j * width^(k - j)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance used to certify Lie membership through Dynkin idempotence.
pub const LIE_TOLERANCE: f64 = 1e-9;

/// Element of the truncated tensor algebra.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTensor")]
pub struct TruncatedTensor {
    width: usize,
    depth: usize,
    levels: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
struct RawTensor {
    width: usize,
    depth: usize,
    levels: Vec<Vec<f64>>,
}

impl TryFrom<RawTensor> for TruncatedTensor {
    type Error = Error;

    fn try_from(raw: RawTensor) -> Result<Self> {
        TruncatedTensor::from_levels(raw.width, raw.depth, raw.levels)
    }
}

impl TruncatedTensor {
    pub fn zeros(width: usize, depth: usize) -> Self {
        assert!(width > 0 && depth > 0, "width and depth must be positive");
        let levels = (0..=depth)
            .map(|k| vec![0.0; width.pow(k as u32)])
            .collect();
        TruncatedTensor {
            width,
            depth,
            levels,
        }
    }

    /// The unit `(1, 0, ..., 0)`.
    pub fn unit(width: usize, depth: usize) -> Self {
        let mut t = Self::zeros(width, depth);
        t.levels[0][0] = 1.0;
        t
    }

    pub fn from_levels(width: usize, depth: usize, levels: Vec<Vec<f64>>) -> Result<Self> {
        if width == 0 || depth == 0 {
            return Err(Error::ShapeMismatch(
                "width and depth must be positive".into(),
            ));
        }
        if levels.len() != depth + 1 {
            return Err(Error::ShapeMismatch(format!(
                "expected {} levels, got {}",
                depth + 1,
                levels.len()
            )));
        }
        for (k, level) in levels.iter().enumerate() {
            if level.len() != width.pow(k as u32) {
                return Err(Error::ShapeMismatch(format!(
                    "level {k} has {} entries, expected {}",
                    level.len(),
                    width.pow(k as u32)
                )));
            }
        }
        Ok(TruncatedTensor {
            width,
            depth,
            levels,
        })
    }

    /// Level-1 tensor with the given coordinates.
    pub fn from_vector(depth: usize, v: &[f64]) -> Self {
        let mut t = Self::zeros(v.len(), depth);
        t.levels[1].copy_from_slice(v);
        t
    }

    /// The basis letter `e_i` (0-based).
    pub fn letter(width: usize, depth: usize, i: usize) -> Self {
        assert!(i < width, "letter {i} out of range for width {width}");
        let mut t = Self::zeros(width, depth);
        t.levels[1][i] = 1.0;
        t
    }

    /// The basis element `e_w` for a word `w`.
    pub fn word(width: usize, depth: usize, w: &[usize]) -> Self {
        assert!(w.len() <= depth);
        let mut t = Self::zeros(width, depth);
        let idx = word_index(width, w);
        t.levels[w.len()][idx] = 1.0;
        t
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn level(&self, k: usize) -> &[f64] {
        &self.levels[k]
    }

    pub fn level_mut(&mut self, k: usize) -> &mut [f64] {
        &mut self.levels[k]
    }

    pub fn levels(&self) -> &[Vec<f64>] {
        &self.levels
    }

    pub fn scalar(&self) -> f64 {
        self.levels[0][0]
    }

    /// Coefficient of the word `w`.
    pub fn coeff(&self, w: &[usize]) -> f64 {
        self.levels[w.len()][word_index(self.width, w)]
    }

    pub fn set_coeff(&mut self, w: &[usize], value: f64) {
        let idx = word_index(self.width, w);
        self.levels[w.len()][idx] = value;
    }

    /// Iterates over `(word, coefficient)` for every level `>= 1`.
    pub fn words(&self) -> impl Iterator<Item = (Vec<usize>, f64)> + '_ {
        (1..=self.depth).flat_map(move |k| {
            self.levels[k]
                .iter()
                .enumerate()
                .map(move |(idx, &c)| (index_word(self.width, k, idx), c))
        })
    }

    fn check_shape(&self, other: &Self) -> Result<()> {
        if self.width != other.width || self.depth != other.depth {
            return Err(Error::ShapeMismatch(format!(
                "(width {}, depth {}) vs (width {}, depth {})",
                self.width, self.depth, other.width, other.depth
            )));
        }
        Ok(())
    }

    fn zip_with(&self, other: &Self, op: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.check_shape(other)?;
        let levels = self
            .levels
            .iter()
            .zip(&other.levels)
            .map(|(a, b)| a.iter().zip(b).map(|(&x, &y)| op(x, y)).collect())
            .collect();
        Ok(TruncatedTensor {
            width: self.width,
            depth: self.depth,
            levels,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |x, y| x + y)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |x, y| x - y)
    }

    pub fn scale(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.levels.iter_mut().flatten().for_each(|c| *c *= factor);
        out
    }

    /// Dilation: level `i` is scaled by `lambda^i`.
    pub fn dilate(&self, lambda: f64) -> Self {
        let mut out = self.clone();
        for (k, level) in out.levels.iter_mut().enumerate() {
            let f = lambda.powi(k as i32);
            level.iter_mut().for_each(|c| *c *= f);
        }
        out
    }

    /// Graded product `(ab)^k = sum_{i+j=k} a^i (x) b^j`, truncated at depth.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        Ok(self.mul_unchecked(other))
    }

    pub(crate) fn mul_unchecked(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.width, self.depth);
        for k in 0..=self.depth {
            let target = &mut out.levels[k];
            for i in 0..=k {
                let a = &self.levels[i];
                let b = &other.levels[k - i];
                let stride = b.len();
                for (ia, &ca) in a.iter().enumerate() {
                    if ca == 0.0 {
                        continue;
                    }
                    let row = &mut target[ia * stride..(ia + 1) * stride];
                    for (t, &cb) in row.iter_mut().zip(b) {
                        *t += ca * cb;
                    }
                }
            }
        }
        out
    }

    /// Commutator `ab - ba`.
    pub fn bracket(&self, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        let ab = self.mul_unchecked(other);
        let ba = other.mul_unchecked(self);
        ab.sub(&ba)
    }

    /// Truncated exponential; requires a zero scalar part.
    pub fn exp(&self) -> Result<GroupTensor> {
        if self.scalar() != 0.0 {
            return Err(Error::LevelZero {
                expected: 0.0,
                found: self.scalar(),
            });
        }
        let mut sum = Self::unit(self.width, self.depth);
        let mut term = sum.clone();
        for k in 1..=self.depth {
            term = term.mul_unchecked(self).scale(1.0 / k as f64);
            sum = sum.add(&term)?;
        }
        Ok(GroupTensor(sum))
    }

    /// Truncated logarithm; requires a unit scalar part.
    pub fn log(&self) -> Result<Self> {
        if self.scalar() != 1.0 {
            return Err(Error::LevelZero {
                expected: 1.0,
                found: self.scalar(),
            });
        }
        let mut x = self.clone();
        x.levels[0][0] = 0.0;
        let mut sum = Self::zeros(self.width, self.depth);
        let mut power = Self::unit(self.width, self.depth);
        for n in 1..=self.depth {
            power = power.mul_unchecked(&x);
            let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
            sum = sum.add(&power.scale(sign / n as f64))?;
        }
        Ok(sum)
    }

    /// `sum_{i>=1} |a^i|^{1/i}` with the Euclidean norm on each level.
    pub fn homogeneous_norm(&self) -> f64 {
        (1..=self.depth)
            .map(|i| {
                let n = self.levels[i].iter().map(|c| c * c).sum::<f64>().sqrt();
                n.powf(1.0 / i as f64)
            })
            .sum()
    }

    /// Euclidean norm of a single level.
    pub fn level_norm(&self, k: usize) -> f64 {
        self.levels[k].iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.levels
            .iter()
            .flatten()
            .zip(other.levels.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.levels
            .iter()
            .flatten()
            .map(|c| c.abs())
            .fold(0.0, f64::max)
    }

    /// Dynkin projection: each word `w` of length `k` is sent to
    /// `(1/k) e_[w]`, with `e_[w]` the right-nested bracket. The scalar
    /// part is dropped.
    pub fn dynkin_project(&self) -> LieTensor {
        let mut out = Self::zeros(self.width, self.depth);
        for k in 1..=self.depth {
            for (idx, &c) in self.levels[k].iter().enumerate() {
                if c == 0.0 {
                    continue;
                }
                let w = index_word(self.width, k, idx);
                let weight = c / k as f64;
                for (term, sign) in right_bracket_expansion(&w) {
                    out.levels[k][word_index(self.width, &term)] += sign * weight;
                }
            }
        }
        LieTensor(out)
    }

    /// Max deviation between the element (scalar part ignored) and its
    /// Dynkin projection.
    pub fn lie_deviation(&self) -> f64 {
        let mut stripped = self.clone();
        stripped.levels[0][0] = 0.0;
        stripped.max_abs_diff(&stripped.dynkin_project().0)
    }
}

/// Row-major index of a word.
pub fn word_index(width: usize, w: &[usize]) -> usize {
    w.iter().fold(0, |acc, &i| {
        debug_assert!(i < width);
        acc * width + i
    })
}

/// Inverse of [`word_index`] at level `k`.
pub fn index_word(width: usize, k: usize, mut idx: usize) -> Vec<usize> {
    let mut w = vec![0; k];
    for slot in w.iter_mut().rev() {
        *slot = idx % width;
        idx /= width;
    }
    w
}

/// All words of length `k`.
pub fn words_of_length(width: usize, k: usize) -> impl Iterator<Item = Vec<usize>> {
    (0..width.pow(k as u32)).map(move |idx| index_word(width, k, idx))
}

/// `e_[w] = [e_{w_1}, [e_{w_2}, [..., e_{w_k}]]]` expanded over words.
pub fn right_bracket_expansion(w: &[usize]) -> Vec<(Vec<usize>, f64)> {
    match w {
        [] => vec![(Vec::new(), 1.0)],
        [i] => vec![(vec![*i], 1.0)],
        [i, rest @ ..] => {
            let inner = right_bracket_expansion(rest);
            let mut out = Vec::with_capacity(2 * inner.len());
            for (v, s) in inner {
                let mut left = Vec::with_capacity(w.len());
                left.push(*i);
                left.extend_from_slice(&v);
                out.push((left, s));
                let mut right = v;
                right.push(*i);
                out.push((right, -s));
            }
            out
        }
    }
}

/// Element of the free nilpotent group: unit scalar part, Lie logarithm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GroupTensor(TruncatedTensor);

impl GroupTensor {
    /// Validates the scalar part and the Lie property of the logarithm.
    pub fn new(t: TruncatedTensor, tol: f64) -> Result<Self> {
        let dev = t.log()?.lie_deviation();
        if dev > tol {
            return Err(Error::NotLie(dev));
        }
        Ok(GroupTensor(t))
    }

    pub fn identity(width: usize, depth: usize) -> Self {
        GroupTensor(TruncatedTensor::unit(width, depth))
    }

    /// Wraps a tensor known to be group-like by construction.
    pub(crate) fn from_trusted(t: TruncatedTensor) -> Self {
        debug_assert_eq!(t.scalar(), 1.0);
        GroupTensor(t)
    }

    pub fn as_tensor(&self) -> &TruncatedTensor {
        &self.0
    }

    pub fn into_tensor(self) -> TruncatedTensor {
        self.0
    }

    pub fn mul(&self, other: &GroupTensor) -> Result<GroupTensor> {
        Ok(GroupTensor(self.0.mul(&other.0)?))
    }

    pub fn log(&self) -> LieTensor {
        LieTensor(self.0.log().expect("group tensors have unit scalar part"))
    }

    /// `exp(-log g)`.
    pub fn inverse(&self) -> GroupTensor {
        self.log().0.scale(-1.0).exp().expect("zero scalar part")
    }
}

/// Element of the free nilpotent Lie algebra.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LieTensor(TruncatedTensor);

impl LieTensor {
    pub fn new(t: TruncatedTensor, tol: f64) -> Result<Self> {
        if t.scalar() != 0.0 {
            return Err(Error::LevelZero {
                expected: 0.0,
                found: t.scalar(),
            });
        }
        let dev = t.lie_deviation();
        if dev > tol {
            return Err(Error::NotLie(dev));
        }
        Ok(LieTensor(t))
    }

    pub fn as_tensor(&self) -> &TruncatedTensor {
        &self.0
    }

    pub fn into_tensor(self) -> TruncatedTensor {
        self.0
    }

    pub fn exp(&self) -> GroupTensor {
        self.0.exp().expect("zero scalar part")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_tensor(
        rng: &mut ChaCha8Rng,
        width: usize,
        depth: usize,
        scalar: f64,
    ) -> TruncatedTensor {
        let mut t = TruncatedTensor::zeros(width, depth);
        for k in 1..=depth {
            for c in t.level_mut(k) {
                *c = rng.gen_range(-1.0..1.0);
            }
        }
        t.level_mut(0)[0] = scalar;
        t
    }

    #[test]
    fn unit_is_left_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random_tensor(&mut rng, 3, 3, 0.7);
        let u = TruncatedTensor::unit(3, 3);
        assert_eq!(u.mul(&a).unwrap(), a);
    }

    #[test]
    fn product_of_letters() {
        let e1 = TruncatedTensor::letter(2, 2, 0);
        let e2 = TruncatedTensor::letter(2, 2, 1);
        let p = e1.mul(&e2).unwrap();
        assert_eq!(p.level(0), &[0.0]);
        assert_eq!(p.level(1), &[0.0, 0.0]);
        assert_eq!(p.level(2), &[0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let a = TruncatedTensor::zeros(2, 2);
        let b = TruncatedTensor::zeros(2, 3);
        assert!(matches!(a.mul(&b), Err(Error::ShapeMismatch(_))));
        assert!(a.bracket(&TruncatedTensor::zeros(3, 2)).is_err());
    }

    #[test]
    fn bracket_of_letters() {
        let e1 = TruncatedTensor::letter(2, 2, 0);
        let e2 = TruncatedTensor::letter(2, 2, 1);
        let b = e1.bracket(&e2).unwrap();
        assert_eq!(b.coeff(&[0, 1]), 1.0);
        assert_eq!(b.coeff(&[1, 0]), -1.0);
        assert_eq!(b.level_norm(1), 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random_tensor(&mut rng, 2, 3, 0.0);
        assert_eq!(a.bracket(&a).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn jacobi_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_tensor(&mut rng, 3, 4, 0.0);
        let b = random_tensor(&mut rng, 3, 4, 0.0);
        let c = random_tensor(&mut rng, 3, 4, 0.0);
        let j1 = a.bracket(&b.bracket(&c).unwrap()).unwrap();
        let j2 = b.bracket(&c.bracket(&a).unwrap()).unwrap();
        let j3 = c.bracket(&a.bracket(&b).unwrap()).unwrap();
        let sum = j1.add(&j2).unwrap().add(&j3).unwrap();
        assert!(sum.max_abs() < 1e-12);
    }

    #[test]
    fn bch_at_depth_two() {
        let (s, t) = (0.3, -0.7);
        let a = TruncatedTensor::letter(2, 2, 0).scale(s).exp().unwrap();
        let b = TruncatedTensor::letter(2, 2, 1).scale(t).exp().unwrap();
        let log = a.mul(&b).unwrap().log();
        // s e1 + t e2 + (st/2)[e1, e2], evaluated term by term
        let mut expected = TruncatedTensor::zeros(2, 2);
        expected.set_coeff(&[0], s);
        expected.set_coeff(&[1], t);
        expected.set_coeff(&[0, 1], s * t / 2.0);
        expected.set_coeff(&[1, 0], -s * t / 2.0);
        assert!(log.as_tensor().max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn exp_of_zero_and_log_roundtrip() {
        assert_eq!(
            TruncatedTensor::zeros(3, 4).exp().unwrap().into_tensor(),
            TruncatedTensor::unit(3, 4)
        );
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10 {
            let a = random_tensor(&mut rng, 3, 4, 0.0);
            let back = a.exp().unwrap().log();
            assert!(back.as_tensor().max_abs_diff(&a) <= 1e-13);
            let g = a.exp().unwrap().into_tensor();
            let again = g.log().unwrap().exp().unwrap().into_tensor();
            assert!(again.max_abs_diff(&g) <= 1e-12);
        }
    }

    #[test]
    fn exp_of_level_one_is_tensor_power() {
        let v = [0.4, -1.2, 0.5];
        let g = TruncatedTensor::from_vector(3, &v)
            .exp()
            .unwrap()
            .into_tensor();
        for w in words_of_length(3, 3) {
            let expected = v[w[0]] * v[w[1]] * v[w[2]] / 6.0;
            assert!((g.coeff(&w) - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn exp_and_log_reject_wrong_scalar() {
        assert!(matches!(
            TruncatedTensor::unit(2, 2).exp(),
            Err(Error::LevelZero { .. })
        ));
        assert!(TruncatedTensor::zeros(2, 2).log().is_err());
    }

    #[test]
    fn inverses() {
        let id = GroupTensor::identity(2, 3);
        assert_eq!(id.inverse(), id);
        let v = TruncatedTensor::from_vector(3, &[0.2, 0.9]);
        let inv = v.exp().unwrap().inverse();
        assert!(
            inv.as_tensor()
                .max_abs_diff(v.scale(-1.0).exp().unwrap().as_tensor())
                < 1e-15
        );
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = random_tensor(&mut rng, 3, 4, 0.0).dynkin_project().exp();
        let prod = g.mul(&g.inverse()).unwrap();
        assert!(prod.as_tensor().max_abs_diff(&TruncatedTensor::unit(3, 4)) <= 1e-12);
    }

    #[test]
    fn homogeneous_norm_examples() {
        assert_eq!(TruncatedTensor::zeros(2, 3).homogeneous_norm(), 0.0);
        let mut a = TruncatedTensor::zeros(2, 2);
        a.set_coeff(&[0], 0.04);
        a.set_coeff(&[1, 1], 0.0016);
        assert!((a.homogeneous_norm() - 0.08).abs() < 1e-15);
    }

    #[test]
    fn dynkin_examples() {
        let e12 = TruncatedTensor::word(2, 2, &[0, 1]);
        let p = e12.dynkin_project();
        assert_eq!(p.as_tensor().coeff(&[0, 1]), 0.5);
        assert_eq!(p.as_tensor().coeff(&[1, 0]), -0.5);
        let br = TruncatedTensor::letter(2, 2, 0)
            .bracket(&TruncatedTensor::letter(2, 2, 1))
            .unwrap();
        assert_eq!(br.dynkin_project().into_tensor(), br);
        assert!(LieTensor::new(e12, LIE_TOLERANCE).is_err());
        assert!(LieTensor::new(br, LIE_TOLERANCE).is_ok());
    }

    #[test]
    fn right_bracket_of_three_letters() {
        // [e0,[e1,e2]] = e0e1e2 - e0e2e1 - e1e2e0 + e2e1e0
        let mut terms = right_bracket_expansion(&[0, 1, 2]);
        terms.sort_by(|a, b| a.0.cmp(&b.0));
        assert_eq!(
            terms,
            vec![
                (vec![0, 1, 2], 1.0),
                (vec![0, 2, 1], -1.0),
                (vec![1, 2, 0], -1.0),
                (vec![2, 1, 0], 1.0),
            ]
        );
    }

    #[test]
    fn json_roundtrip_and_validation() {
        let t = TruncatedTensor::from_vector(2, &[1.0, 2.0])
            .exp()
            .unwrap()
            .into_tensor();
        let s = serde_json::to_string(&t).unwrap();
        assert!(s.starts_with(
            "{\"width\":2,\"depth\":2,\"levels\":[[1.0],[1.0,2.0],[0.5,1.0,1.0,2.0]]"
        ));
        let back: TruncatedTensor = serde_json::from_str(&s).unwrap();
        assert_eq!(back, t);
        let bad = r#"{"width":2,"depth":1,"levels":[[1.0],[1.0]]}"#;
        assert!(serde_json::from_str::<TruncatedTensor>(bad).is_err());
    }
}
