//! Location families (normal, Student t, Cauchy) with exact log-densities
//! and CDFs, plus reproducible stream-seeded sampling.
//!
//! Every family is parameterized as f(x, θ) = f₀((x − θ)/scale)/scale with a
//! fixed, known scale; θ is the only free parameter anywhere in this crate.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const LN_2PI: f64 = 1.837_877_066_409_345_4;
const LN_PI: f64 = 1.144_729_885_849_400_2;

/// Base density of a location family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Normal,
    StudentT { df: u32 },
    Cauchy,
}

/// A one-parameter location family f(x, θ) = f₀((x − θ)/scale)/scale.
///
/// The scale is fixed at construction; only the location θ is ever estimated.
/// Deserialization funnels through [`LocationModel::new`], so a hand-edited
/// configuration cannot smuggle in a non-positive scale.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawLocationModel")]
pub struct LocationModel {
    family: Family,
    scale: f64,
}

#[derive(Deserialize)]
struct RawLocationModel {
    family: Family,
    scale: f64,
}

impl TryFrom<RawLocationModel> for LocationModel {
    type Error = Error;

    fn try_from(raw: RawLocationModel) -> Result<Self> {
        Self::new(raw.family, raw.scale)
    }
}

impl LocationModel {
    /// Builds a model, validating that the scale is positive and, for the
    /// Student t family, that the degrees of freedom are at least 1.
    pub fn new(family: Family, scale: f64) -> Result<Self> {
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::InvalidInput(format!(
                "scale must be a positive finite real, got {scale}"
            )));
        }
        if let Family::StudentT { df } = family {
            if df < 1 {
                return Err(Error::InvalidInput(
                    "Student t degrees of freedom must be at least 1".into(),
                ));
            }
        }
        Ok(Self { family, scale })
    }

    /// Standard normal base, scale 1.
    pub fn standard_normal() -> Self {
        Self { family: Family::Normal, scale: 1.0 }
    }

    /// Standard Cauchy base, scale 1.
    pub fn standard_cauchy() -> Self {
        Self { family: Family::Cauchy, scale: 1.0 }
    }

    /// Student t base with `df` degrees of freedom, scale 1.
    pub fn student_t(df: u32) -> Result<Self> {
        Self::new(Family::StudentT { df }, 1.0)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// log f(x, θ). Finite for every finite input in all three families.
    pub fn log_pdf(&self, theta: f64, x: f64) -> f64 {
        let z = (x - theta) / self.scale;
        let base = match self.family {
            Family::Normal => -0.5 * z * z - 0.5 * LN_2PI,
            Family::Cauchy => -LN_PI - (1.0 + z * z).ln(),
            Family::StudentT { df } => {
                let nu = f64::from(df);
                let half = 0.5 * (nu + 1.0);
                libm::lgamma(half)
                    - libm::lgamma(0.5 * nu)
                    - 0.5 * (nu * std::f64::consts::PI).ln()
                    - half * (1.0 + z * z / nu).ln()
            }
        };
        base - self.scale.ln()
    }

    /// F(x, θ) = P(X ≤ x) under location θ. Absolute accuracy ≤ 1e-12.
    pub fn cdf(&self, theta: f64, x: f64) -> f64 {
        let z = (x - theta) / self.scale;
        match self.family {
            Family::Normal => special::normal_cdf(z),
            Family::Cauchy => 0.5 + z.atan() / std::f64::consts::PI,
            Family::StudentT { df } => {
                let nu = f64::from(df);
                // One-tail via the regularized incomplete beta; reflect for
                // z > 0 so the small-probability tail is always the one
                // computed directly.
                let tail = 0.5 * special::betai_reg(0.5 * nu, 0.5, nu / (nu + z * z));
                if z <= 0.0 {
                    tail
                } else {
                    1.0 - tail
                }
            }
        }
    }

    /// One draw from f(·, θ).
    pub fn draw<R: Rng + ?Sized>(&self, theta: f64, rng: &mut R) -> f64 {
        let z = match self.family {
            Family::Normal => StandardNormal.sample(rng),
            Family::Cauchy => {
                // Inverse CDF; nudge u away from 0 so tan never sits exactly
                // on the pole.
                let u: f64 = rng.gen();
                let u = if u == 0.0 { f64::MIN_POSITIVE } else { u };
                (std::f64::consts::PI * (u - 0.5)).tan()
            }
            Family::StudentT { df } => {
                // z / sqrt(chi²_df / df) with the chi-square built from df
                // squared normals: exact in distribution, no rejection loop.
                let z: f64 = StandardNormal.sample(rng);
                let mut chi2 = 0.0;
                for _ in 0..df {
                    let g: f64 = StandardNormal.sample(rng);
                    chi2 += g * g;
                }
                z / (chi2 / f64::from(df)).sqrt()
            }
        };
        theta + self.scale * z
    }

    /// `count` i.i.d. draws from f(·, θ), deterministic given the stream.
    pub fn sample(&self, theta: f64, stream: &RngStream, count: usize) -> Vec<f64> {
        let mut rng = stream.rng();
        (0..count).map(|_| self.draw(theta, &mut rng)).collect()
    }
}

/// Descriptor for a reproducible random stream.
///
/// Identical (master_seed, replication_index, purpose_tag) triples always
/// yield the identical draw sequence; distinct replication indices or tags
/// yield decorrelated streams. This makes Monte Carlo replications
/// order-independent: any replication's stream can be constructed directly,
/// without drawing through its predecessors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RngStream {
    pub master_seed: u64,
    pub replication_index: u64,
    pub purpose_tag: String,
}

impl RngStream {
    pub fn new(master_seed: u64, replication_index: u64, purpose_tag: &str) -> Self {
        Self { master_seed, replication_index, purpose_tag: purpose_tag.to_owned() }
    }

    /// Instantiates the generator for this stream.
    ///
    /// The seed derivation (SplitMix64 absorption of the replication index
    /// and tag bytes, then four output words) is frozen: changing any
    /// constant here changes every simulated number in the project.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut sm = SplitMix64(self.master_seed);
        let absorb = |sm: &mut SplitMix64, value: u64| {
            let mixed = sm.next_u64() ^ value;
            *sm = SplitMix64(mixed);
        };
        absorb(&mut sm, self.replication_index);
        for chunk in self.purpose_tag.as_bytes().chunks(8) {
            let mut word = [0u8; 8];
            word[..chunk.len()].copy_from_slice(chunk);
            absorb(&mut sm, u64::from_le_bytes(word));
        }
        absorb(&mut sm, self.purpose_tag.len() as u64);
        let mut seed = [0u8; 32];
        for word in seed.chunks_mut(8) {
            word.copy_from_slice(&sm.next_u64().to_le_bytes());
        }
        ChaCha8Rng::from_seed(seed)
    }
}

/// SplitMix64 step, used only to spread seed material into ChaCha key bytes.
struct SplitMix64(u64);

impl SplitMix64 {
    fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
}

/// Scalar special functions backing the CDFs and the binomial confidence
/// bound in the Monte Carlo harness.
pub(crate) mod special {
    /// Standard normal CDF via the complementary error function.
    #[inline]
    pub fn normal_cdf(z: f64) -> f64 {
        0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
    }

    /// Regularized incomplete beta function I_x(a, b) for a, b > 0 and
    /// x ∈ [0, 1], by the symmetric continued-fraction expansion.
    pub fn betai_reg(a: f64, b: f64, x: f64) -> f64 {
        assert!(a > 0.0 && b > 0.0 && (0.0..=1.0).contains(&x), "betai_reg domain");
        if x == 0.0 {
            return 0.0;
        }
        if x == 1.0 {
            return 1.0;
        }
        let ln_front = libm::lgamma(a + b) - libm::lgamma(a) - libm::lgamma(b)
            + a * x.ln()
            + b * (1.0 - x).ln();
        let front = ln_front.exp();
        // The continued fraction converges fastest for x below the mean
        // a/(a+b); use the reflection I_x(a,b) = 1 − I_{1−x}(b,a) otherwise.
        if x < (a + 1.0) / (a + b + 2.0) {
            front * betacf(a, b, x) / a
        } else {
            1.0 - front * betacf(b, a, 1.0 - x) / b
        }
    }

    /// Continued fraction for the incomplete beta (modified Lentz method).
    fn betacf(a: f64, b: f64, x: f64) -> f64 {
        const TINY: f64 = 1e-300;
        const EPS: f64 = 1e-16;
        let qab = a + b;
        let qap = a + 1.0;
        let qam = a - 1.0;
        let mut c = 1.0;
        let mut d = 1.0 - qab * x / qap;
        if d.abs() < TINY {
            d = TINY;
        }
        d = 1.0 / d;
        let mut h = d;
        for m in 1..=300 {
            let m = f64::from(m);
            let m2 = 2.0 * m;
            // Even step.
            let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
            d = 1.0 + aa * d;
            if d.abs() < TINY {
                d = TINY;
            }
            c = 1.0 + aa / c;
            if c.abs() < TINY {
                c = TINY;
            }
            d = 1.0 / d;
            h *= d * c;
            // Odd step.
            let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
            d = 1.0 + aa * d;
            if d.abs() < TINY {
                d = TINY;
            }
            c = 1.0 + aa / c;
            if c.abs() < TINY {
                c = TINY;
            }
            d = 1.0 / d;
            let del = d * c;
            h *= del;
            if (del - 1.0).abs() < EPS {
                break;
            }
        }
        h
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn t5() -> LocationModel {
        LocationModel::student_t(5).unwrap()
    }

    #[test]
    fn construction_validates_inputs() {
        assert!(LocationModel::new(Family::Normal, 0.0).is_err());
        assert!(LocationModel::new(Family::Normal, -1.0).is_err());
        assert!(LocationModel::new(Family::Normal, f64::NAN).is_err());
        assert!(LocationModel::new(Family::StudentT { df: 0 }, 1.0).is_err());
        assert!(LocationModel::new(Family::StudentT { df: 1 }, 2.5).is_ok());
    }

    #[test]
    fn log_pdf_matches_closed_forms() {
        let normal = LocationModel::standard_normal();
        let cauchy = LocationModel::standard_cauchy();
        assert_abs_diff_eq!(normal.log_pdf(0.0, 0.0), -0.918_938_533_204_672_7, epsilon = 1e-14);
        assert_abs_diff_eq!(cauchy.log_pdf(0.0, 0.0), -1.144_729_885_849_400_2, epsilon = 1e-14);
        // Location-shift identity at an arbitrary center.
        for c in [-3.25, 0.0, 7.5, 1e6] {
            assert_eq!(normal.log_pdf(c, c), normal.log_pdf(0.0, 0.0));
        }
        // Fixed external oracle values at x = 0.7.
        assert_abs_diff_eq!(normal.log_pdf(0.0, 0.7), -1.163_938_533_204_672_6, epsilon = 1e-13);
        assert_abs_diff_eq!(cauchy.log_pdf(0.0, 0.7), -1.543_506_005_806_767_8, epsilon = 1e-13);
        assert_abs_diff_eq!(t5().log_pdf(0.0, 0.7), -1.249_090_618_316_740_7, epsilon = 1e-13);
    }

    #[test]
    fn cdf_matches_oracles() {
        let normal = LocationModel::standard_normal();
        let cauchy = LocationModel::standard_cauchy();
        assert_abs_diff_eq!(normal.cdf(0.0, 0.0), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(cauchy.cdf(0.0, 1.0), 0.75, epsilon = 1e-15);
        assert_abs_diff_eq!(normal.cdf(0.0, -1.0), 0.158_655_253_931_457_07, epsilon = 1e-12);
        assert_abs_diff_eq!(normal.cdf(0.0, 1.96), 0.975_002_104_851_779_5, epsilon = 1e-12);
        assert_abs_diff_eq!(normal.cdf(0.0, -5.0), 2.866_515_718_791_933e-7, epsilon = 1e-15);

        // Student t against a high-precision external oracle.
        assert_abs_diff_eq!(t5().cdf(0.0, -3.0), 0.015_049_623_948_731_284, epsilon = 1e-12);
        assert_abs_diff_eq!(t5().cdf(0.0, -1.0), 0.181_608_733_824_561_27, epsilon = 1e-12);
        assert_abs_diff_eq!(t5().cdf(0.0, 0.7), 0.742_425_525_842_591_8, epsilon = 1e-12);
        assert_abs_diff_eq!(t5().cdf(0.0, 2.5), 0.972_754_950_328_811_9, epsilon = 1e-12);
        let t2 = LocationModel::student_t(2).unwrap();
        assert_abs_diff_eq!(t2.cdf(0.0, -0.5), 1.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(t2.cdf(0.0, 2.5), 0.935_194_139_889_244_6, epsilon = 1e-12);
        let t30 = LocationModel::student_t(30).unwrap();
        assert_abs_diff_eq!(t30.cdf(0.0, -1.0), 0.162_654_307_713_014_92, epsilon = 1e-12);

        // t with df = 1 is exactly the Cauchy.
        let t1 = LocationModel::student_t(1).unwrap();
        for x in [-3.0, -0.5, 0.0, 0.7, 2.5] {
            assert_abs_diff_eq!(t1.cdf(0.0, x), cauchy.cdf(0.0, x), epsilon = 1e-12);
        }
        assert_abs_diff_eq!(t1.cdf(0.0, 2.5), 0.878_881_058_409_156_6, epsilon = 1e-12);

        // Shifted and scaled variants.
        let t5s = LocationModel::new(Family::StudentT { df: 5 }, 3.0).unwrap();
        assert_abs_diff_eq!(t5s.cdf(2.0, 4.1), 0.742_425_525_842_591_8, epsilon = 1e-12);
        let ns = LocationModel::new(Family::Normal, 0.5).unwrap();
        assert_abs_diff_eq!(ns.cdf(-1.0, 0.2), 0.991_802_464_075_403_8, epsilon = 1e-12);
        let cs = LocationModel::new(Family::Cauchy, 2.0).unwrap();
        assert_abs_diff_eq!(cs.cdf(3.0, -1.0), 0.147_583_617_650_433_26, epsilon = 1e-12);
    }

    #[test]
    fn cdf_is_monotone_with_correct_limits() {
        for model in [LocationModel::standard_normal(), t5(), LocationModel::standard_cauchy()] {
            let mut prev = 0.0;
            for i in 0..=400 {
                let x = -20.0 + f64::from(i) * 0.1;
                let f = model.cdf(0.0, x);
                assert!((0.0..=1.0).contains(&f));
                assert!(f >= prev, "cdf not monotone at {x}");
                prev = f;
            }
            assert!(model.cdf(0.0, -1e15) < 1e-12);
            assert!(model.cdf(0.0, 1e15) > 1.0 - 1e-12);
        }
    }

    #[test]
    fn cdf_integrates_log_pdf() {
        // F(x) − F(−10) must match the numerical integral of the density.
        for model in [LocationModel::standard_normal(), t5(), LocationModel::standard_cauchy()] {
            for i in 0..=10 {
                let x = -10.0 + 2.0 * f64::from(i);
                let integral =
                    crate::onedim::adaptive_simpson(|u| model.log_pdf(0.0, u).exp(), -10.0, x, 1e-9)
                        .unwrap();
                let diff = model.cdf(0.0, x) - model.cdf(0.0, -10.0);
                assert_abs_diff_eq!(integral, diff, epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn sampling_is_deterministic_and_location_equivariant() {
        let stream = RngStream::new(42, 7, "unit");
        for model in [LocationModel::standard_normal(), t5(), LocationModel::standard_cauchy()] {
            assert!(model.sample(0.0, &stream, 0).is_empty());
            let a = model.sample(1.5, &stream, 256);
            let b = model.sample(1.5, &stream, 256);
            assert_eq!(a, b);
            let centered = model.sample(0.0, &stream, 256);
            for (ai, ci) in a.iter().zip(&centered) {
                assert_eq!(*ai, ci + 1.5);
            }
        }
    }

    #[test]
    fn distinct_streams_decorrelate() {
        let base = RngStream::new(42, 7, "unit");
        let other_rep = RngStream::new(42, 8, "unit");
        let other_tag = RngStream::new(42, 7, "unit2");
        let other_seed = RngStream::new(43, 7, "unit");
        let model = LocationModel::standard_normal();
        let x = model.sample(0.0, &base, 32);
        for s in [&other_rep, &other_tag, &other_seed] {
            assert_ne!(x, model.sample(0.0, s, 32));
        }
        // Tag padding must not collide with explicit zero bytes.
        let padded = RngStream::new(42, 7, "ab");
        let zeroed = RngStream::new(42, 7, "ab\0");
        assert_ne!(model.sample(0.0, &padded, 32), model.sample(0.0, &zeroed, 32));
    }

    #[test]
    fn big_sample_mean_is_near_location() {
        let stream = RngStream::new(7, 0, "clt");
        let x = LocationModel::standard_normal().sample(0.0, &stream, 1_000_000);
        let mean = x.iter().sum::<f64>() / x.len() as f64;
        assert!(mean.abs() < 4e-3, "mean {mean}");
    }

    #[test]
    fn empirical_cdf_tracks_model_cdf() {
        // Glivenko–Cantelli sanity check: the KS distance between 1e5 draws
        // and the model CDF stays below 0.01 for each family.
        for (i, model) in
            [LocationModel::standard_normal(), t5(), LocationModel::standard_cauchy()]
                .into_iter()
                .enumerate()
        {
            let stream = RngStream::new(2024, i as u64, "gc");
            let mut x = model.sample(0.0, &stream, 100_000);
            x.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let n = x.len() as f64;
            let mut ks: f64 = 0.0;
            for (j, xi) in x.iter().enumerate() {
                let f = model.cdf(0.0, *xi);
                ks = ks.max((f - j as f64 / n).abs()).max(((j + 1) as f64 / n - f).abs());
            }
            assert!(ks < 0.01, "KS {ks} for {:?}", model.family());
        }
    }

    #[test]
    fn beta_special_function_matches_oracles() {
        // I_x(a, b) fixed points: symmetric half, closed form for b = 1.
        assert_abs_diff_eq!(special::betai_reg(2.0, 2.0, 0.5), 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(special::betai_reg(3.0, 1.0, 0.4), 0.4_f64.powi(3), epsilon = 1e-14);
        assert_abs_diff_eq!(special::betai_reg(1.0, 3.0, 0.4), 1.0 - 0.6_f64.powi(3), epsilon = 1e-14);
        assert_relative_eq!(
            special::betai_reg(2.5, 0.5, 0.9),
            1.0 - special::betai_reg(0.5, 2.5, 0.1),
            epsilon = 1e-13
        );
    }
}
