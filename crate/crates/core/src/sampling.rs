//! Seeded generation of evaluation points.
//!
//! Every stream is a ChaCha8 generator seeded through `seed_from_u64`, which
//! is specified bit-for-bit by `rand_core` and therefore reproducible across
//! platforms. Uniform variates are built from the top 52 bits of each word
//! with a half-step offset, so they never hit the interval endpoints.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};

/// Identifier written into experiment metadata.
pub const RNG_ALGORITHM: &str = "chacha8(rand_chacha-0.3,seed_from_u64);u52-open;gauss-polar;exp-inverse-cdf";

const INV_2_52: f64 = 1.0 / 4_503_599_627_370_496.0;

/// Maps uniform draws on `(-1, 1)` (r = 0) or `[0, 1)` (r = 1) onto the real
/// line or half line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MappingSpec {
    r: u8,
    l: f64,
}

impl MappingSpec {
    pub fn new(r: u8, l: f64) -> Result<Self> {
        if r > 1 {
            return Err(Error::Parameter(format!("mapping exponent r must be 0 or 1, got {r}")));
        }
        if !(l.is_finite() && l > 0.0) {
            return Err(Error::Parameter(format!("mapping parameter L must be positive, got {l}")));
        }
        Ok(Self { r, l })
    }

    /// Logarithmic map `y = (L/2) log((1+xi)/(1-xi))` onto the real line.
    pub fn logarithmic(l: f64) -> Result<Self> {
        Self::new(0, l)
    }

    /// Algebraic map `y = L xi / sqrt(1 - xi^2)` onto the half line.
    pub fn algebraic(l: f64) -> Result<Self> {
        Self::new(1, l)
    }

    pub fn r(&self) -> u8 {
        self.r
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    /// Inverse map `xi(y)`.
    pub fn inverse(&self, y: f64) -> f64 {
        let t = y / self.l;
        match self.r {
            0 => t.tanh(),
            _ => t / (t * t + 1.0).sqrt(),
        }
    }
}

pub fn map_point(xi: f64, spec: &MappingSpec) -> Result<f64> {
    match spec.r {
        0 => {
            if !(xi.abs() < 1.0) {
                return Err(Error::Domain {
                    coord: 0,
                    value: xi,
                    reason: "logarithmic map needs |xi| < 1",
                });
            }
            // atanh(xi) = log((1+xi)/(1-xi)) / 2
            Ok(spec.l * xi.atanh())
        }
        _ => {
            if !(0.0..1.0).contains(&xi) {
                return Err(Error::Domain {
                    coord: 0,
                    value: xi,
                    reason: "algebraic map needs 0 <= xi < 1",
                });
            }
            Ok(spec.l * xi / ((1.0 - xi) * (1.0 + xi)).sqrt())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Distribution {
    /// Density proportional to `e^{-y^2}` per coordinate, i.e. N(0, 1/2).
    Gaussian,
    /// Density `e^{-y}` on the half line.
    Exponential,
    /// Uniform on `(-1, 1)`.
    UniformSym,
    /// Uniform on `(0, 1)`.
    UniformPos,
    MappedUniform(MappingSpec),
}

impl Distribution {
    pub fn label(&self) -> String {
        match self {
            Distribution::Gaussian => "gaussian".into(),
            Distribution::Exponential => "exponential".into(),
            Distribution::UniformSym => "uniform-sym".into(),
            Distribution::UniformPos => "uniform-pos".into(),
            Distribution::MappedUniform(m) => format!("mapped(r={},L={})", m.r, m.l),
        }
    }
}

/// Uniform, Gaussian and exponential variates from one ChaCha8 stream.
#[derive(Debug, Clone)]
pub struct SampleRng {
    inner: ChaCha8Rng,
    spare_normal: Option<f64>,
}

impl SampleRng {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: ChaCha8Rng::seed_from_u64(seed),
            spare_normal: None,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on the open interval `(0, 1)`.
    pub fn uniform_open(&mut self) -> f64 {
        ((self.inner.next_u64() >> 12) as f64 + 0.5) * INV_2_52
    }

    /// Uniform on `(-1, 1)`; the extreme values are `±(1 - 2^-52)`.
    pub fn uniform_sym(&mut self) -> f64 {
        2.0 * self.uniform_open() - 1.0
    }

    /// Standard normal by the Marsaglia polar method. Variates come in pairs;
    /// the second one is cached for the next call.
    pub fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        loop {
            let u = self.uniform_sym();
            let v = self.uniform_sym();
            let s = u * u + v * v;
            if s < 1.0 && s > 0.0 {
                let f = (-2.0 * s.ln() / s).sqrt();
                self.spare_normal = Some(v * f);
                return u * f;
            }
        }
    }

    /// Exponential(1) by inversion, `-log(1 - u)`; strictly positive.
    pub fn exponential(&mut self) -> f64 {
        -(-self.uniform_open()).ln_1p()
    }
}

/// An `m x d` matrix of evaluation points with its provenance.
///
/// `frame_scale` records a per-dimension divisor applied after drawing:
/// `points[k][i] = raw[k][i] / frame_scale[i]`. It is all ones for plain
/// draws and equals the scaling factors when points are viewed in a scaled
/// target frame (see [`SampleSet::rescaled`]).
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    points: Vec<f64>,
    m: usize,
    d: usize,
    distribution: Distribution,
    seed: u64,
    frame_scale: Vec<f64>,
}

impl SampleSet {
    /// Wraps caller-provided points (e.g. deterministic nodes). Provenance is
    /// recorded as the given distribution and seed.
    pub fn from_points(points: Vec<f64>, d: usize, distribution: Distribution, seed: u64) -> Result<Self> {
        if d == 0 || points.len() % d != 0 {
            return Err(Error::Parameter(format!(
                "{} values do not form rows of dimension {d}",
                points.len()
            )));
        }
        Ok(Self {
            m: points.len() / d,
            points,
            d,
            distribution,
            seed,
            frame_scale: vec![1.0; d],
        })
    }

    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn distribution(&self) -> &Distribution {
        &self.distribution
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn frame_scale(&self) -> &[f64] {
        &self.frame_scale
    }

    pub fn algorithm(&self) -> &'static str {
        RNG_ALGORITHM
    }

    pub fn point(&self, k: usize) -> &[f64] {
        &self.points[k * self.d..(k + 1) * self.d]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.points.chunks_exact(self.d)
    }

    /// Values of coordinate `i` across all points.
    pub fn column(&self, i: usize) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().skip(i).step_by(self.d).copied()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.points
    }

    /// Same points divided coordinate-wise by `scale` (composing with any
    /// existing frame scale).
    pub fn rescaled(&self, scale: &[f64]) -> Result<Self> {
        if scale.len() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: scale.len(),
            });
        }
        let mut points = self.points.clone();
        for row in points.chunks_exact_mut(self.d) {
            for (v, s) in row.iter_mut().zip(scale) {
                *v /= s;
            }
        }
        Ok(Self {
            points,
            m: self.m,
            d: self.d,
            distribution: self.distribution,
            seed: self.seed,
            frame_scale: self.frame_scale.iter().zip(scale).map(|(a, b)| a * b).collect(),
        })
    }

    /// Replaces one point in place (used when a model rejects a draw).
    pub fn replace_point(&mut self, k: usize, point: &[f64]) {
        self.points[k * self.d..(k + 1) * self.d].copy_from_slice(point);
    }
}

pub fn draw_point(rng: &mut SampleRng, dist: &Distribution, out: &mut [f64]) {
    for v in out.iter_mut() {
        *v = match dist {
            Distribution::Gaussian => rng.standard_normal() * std::f64::consts::FRAC_1_SQRT_2,
            Distribution::Exponential => rng.exponential(),
            Distribution::UniformSym => rng.uniform_sym(),
            Distribution::UniformPos => rng.uniform_open(),
            Distribution::MappedUniform(spec) => {
                let xi = match spec.r {
                    0 => rng.uniform_sym(),
                    _ => rng.uniform_open(),
                };
                // Open-interval draws keep xi inside the map's domain.
                map_point(xi, spec).expect("open-interval draw inside mapping domain")
            }
        };
    }
}

/// Draws `m` i.i.d. points in `d` dimensions, row by row.
pub fn sample(dist: Distribution, m: usize, d: usize, seed: u64) -> Result<SampleSet> {
    if m == 0 || d == 0 {
        return Err(Error::Parameter(format!("need m >= 1 and d >= 1, got m={m}, d={d}")));
    }
    let mut rng = SampleRng::new(seed);
    let mut points = vec![0.0; m * d];
    for row in points.chunks_exact_mut(d) {
        draw_point(&mut rng, &dist, row);
    }
    Ok(SampleSet {
        points,
        m,
        d,
        distribution: dist,
        seed,
        frame_scale: vec![1.0; d],
    })
}

fn splitmix64_finalize(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for trial `trial_index` of an experiment seeded with `base_seed`.
pub fn derive_trial_seed(base_seed: u64, trial_index: u64) -> u64 {
    let salt = splitmix64_finalize(trial_index.wrapping_add(0x9e37_79b9_7f4a_7c15));
    splitmix64_finalize(base_seed ^ salt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn same_seed_same_points() {
        let dist = Distribution::MappedUniform(MappingSpec::logarithmic(8.0).unwrap());
        let a = sample(dist, 100, 3, 42).unwrap();
        let b = sample(dist, 100, 3, 42).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, sample(dist, 100, 3, 43).unwrap());
    }

    #[test]
    fn exponential_mean() {
        let m = 1_000_000;
        let s = sample(Distribution::Exponential, m, 1, 11).unwrap();
        assert!(s.as_slice().iter().all(|&y| y > 0.0));
        let mean = s.as_slice().iter().sum::<f64>() / m as f64;
        // sd of Exp(1) is 1; 3 sigma / sqrt(m)
        assert!((mean - 1.0).abs() < 3.0 / (m as f64).sqrt(), "{mean}");
    }

    #[test]
    fn gaussian_variance_is_one_half() {
        let m = 1_000_000;
        let s = sample(Distribution::Gaussian, m, 1, 12).unwrap();
        let v = s.as_slice();
        let mean = v.iter().sum::<f64>() / m as f64;
        let var = v.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / (m - 1) as f64;
        // var(s^2) = 2 sigma^4 = 0.5 for sigma^2 = 1/2
        let band = 3.0 * 0.5f64.sqrt() / (m as f64).sqrt();
        assert!((var - 0.5).abs() < band, "{var}");
        assert!(mean.abs() < 3.0 * 0.5f64.sqrt() / (m as f64).sqrt());
    }

    #[test]
    fn map_point_examples() {
        let log8 = MappingSpec::logarithmic(8.0).unwrap();
        assert_eq!(map_point(0.0, &log8).unwrap(), 0.0);
        for l in [0.5, 3.0, 8.0, 64.0] {
            let spec = MappingSpec::logarithmic(l).unwrap();
            assert_relative_eq!(map_point(1f64.tanh(), &spec).unwrap(), l, max_relative = 1e-14);
        }
        let alg = MappingSpec::algebraic(64.0).unwrap();
        assert_relative_eq!(map_point(0.5f64.sqrt(), &alg).unwrap(), 64.0, max_relative = 1e-14);
        assert!(map_point(1.0, &log8).is_err());
        assert!(map_point(-1.0, &log8).is_err());
        assert!(map_point(1.0, &alg).is_err());
        assert!(map_point(-0.1, &alg).is_err());
        assert!(MappingSpec::new(2, 1.0).is_err());
        assert!(MappingSpec::new(0, 0.0).is_err());
    }

    #[test]
    fn map_inverse_round_trip() {
        for l in [1.0, 8.0, 64.0] {
            let log = MappingSpec::logarithmic(l).unwrap();
            let alg = MappingSpec::algebraic(l).unwrap();
            for i in 0..=2000 {
                let y = -10.0 * l + i as f64 * (20.0 * l / 2000.0);
                if y.abs() > 1e-12 {
                    // atanh near +-1 amplifies the rounding of xi by
                    // |xi| / (1 - xi^2); allow a few ulps of that.
                    let xi = log.inverse(y);
                    let cond = (xi.abs() / (1.0 - xi * xi)).max(1.0) * l / y.abs();
                    let tol = 1e-12f64.max(8.0 * f64::EPSILON * cond);
                    assert_relative_eq!(map_point(xi, &log).unwrap(), y, max_relative = tol);
                }
                let y = i as f64 * (100.0 * l / 2000.0);
                if y > 0.0 {
                    let xi = alg.inverse(y);
                    let tol = 1e-12f64.max(8.0 * f64::EPSILON / (1.0 - xi * xi));
                    assert_relative_eq!(map_point(xi, &alg).unwrap(), y, max_relative = tol);
                }
            }
        }
    }

    #[test]
    fn map_is_strictly_increasing() {
        for spec in [MappingSpec::logarithmic(8.0).unwrap(), MappingSpec::algebraic(64.0).unwrap()] {
            let (lo, hi) = if spec.r() == 0 { (-1.0, 1.0) } else { (0.0, 1.0) };
            let mut prev = f64::NEG_INFINITY;
            for i in 1..10_000 {
                let xi = lo + (hi - lo) * i as f64 / 10_000.0;
                let y = map_point(xi, &spec).unwrap();
                assert!(y > prev);
                prev = y;
            }
        }
    }

    #[test]
    fn logarithmic_pushforward_density() {
        let l = 8.0;
        let m = 1_000_000;
        let spec = MappingSpec::logarithmic(l).unwrap();
        let s = sample(Distribution::MappedUniform(spec), m, 1, 5).unwrap();
        // 50 bins on [-3L, 3L]; expected mass from the CDF (1 + tanh(y/L))/2.
        let (a, b, bins) = (-3.0 * l, 3.0 * l, 50usize);
        let width = (b - a) / bins as f64;
        let mut counts = vec![0usize; bins];
        for &y in s.as_slice() {
            if y >= a && y < b {
                counts[((y - a) / width) as usize] += 1;
            }
        }
        let cdf = |y: f64| 0.5 * (1.0 + (y / l).tanh());
        let mut chi2 = 0.0;
        for (j, &c) in counts.iter().enumerate() {
            let lo = a + j as f64 * width;
            let expected = m as f64 * (cdf(lo + width) - cdf(lo));
            chi2 += (c as f64 - expected).powi(2) / expected;
        }
        // 49 degrees of freedom; 99.9th percentile is about 85.
        assert!(chi2 < 85.0, "chi2 = {chi2}");
    }

    #[test]
    fn mapped_points_positive_and_finite() {
        let s = sample(Distribution::MappedUniform(MappingSpec::algebraic(64.0).unwrap()), 100_000, 2, 3).unwrap();
        assert!(s.as_slice().iter().all(|y| y.is_finite() && *y > 0.0));
        let s = sample(Distribution::MappedUniform(MappingSpec::logarithmic(8.0).unwrap()), 100_000, 2, 3).unwrap();
        assert!(s.as_slice().iter().all(|y| y.is_finite()));
    }

    #[test]
    fn open_interval_extremes_map_finitely() {
        let top = ((u64::MAX >> 12) as f64 + 0.5) * INV_2_52;
        assert!(top < 1.0);
        assert!(2.0 * top - 1.0 < 1.0);
        let bottom = 0.5 * INV_2_52;
        assert!(2.0 * bottom - 1.0 > -1.0);
        assert!(-(-bottom).ln_1p() > 0.0);
        assert!(map_point(2.0 * top - 1.0, &MappingSpec::logarithmic(8.0).unwrap()).unwrap().is_finite());
    }

    #[test]
    fn trial_seeds_are_distinct() {
        let mut rng = SampleRng::new(2024);
        for _ in 0..10_000 {
            let s = rng.next_u64();
            assert_eq!(derive_trial_seed(s, 3), derive_trial_seed(s, 3));
            assert_ne!(derive_trial_seed(s, 0), derive_trial_seed(s, 1));
        }
        let mut all: Vec<u64> = (0..100_000).map(|i| derive_trial_seed(9, i)).collect();
        all.sort_unstable();
        all.dedup();
        assert_eq!(all.len(), 100_000);
    }

    #[test]
    fn trial_streams_are_uncorrelated() {
        let m = 10_000;
        let streams: Vec<Vec<f64>> = (0..100)
            .map(|i| {
                let s = sample(Distribution::UniformSym, m, 1, derive_trial_seed(77, i)).unwrap();
                s.as_slice().to_vec()
            })
            .collect();
        for i in 0..streams.len() {
            for j in i + 1..streams.len() {
                let (a, b) = (&streams[i], &streams[j]);
                let ma = a.iter().sum::<f64>() / m as f64;
                let mb = b.iter().sum::<f64>() / m as f64;
                let mut sab = 0.0;
                let mut saa = 0.0;
                let mut sbb = 0.0;
                for (x, y) in a.iter().zip(b) {
                    sab += (x - ma) * (y - mb);
                    saa += (x - ma).powi(2);
                    sbb += (y - mb).powi(2);
                }
                let corr = sab / (saa * sbb).sqrt();
                assert!(corr.abs() < 0.05, "streams {i},{j}: {corr}");
            }
        }
    }

    #[test]
    fn rescaled_composes() {
        let s = sample(Distribution::UniformSym, 5, 2, 1).unwrap();
        let t = s.rescaled(&[2.0, 4.0]).unwrap();
        assert_eq!(t.frame_scale(), &[2.0, 4.0]);
        assert_eq!(t.point(3)[1], s.point(3)[1] / 4.0);
        assert!(s.rescaled(&[1.0]).is_err());
    }
}
