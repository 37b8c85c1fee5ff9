//! The discrete target measure and the source-measure samplers.

use std::path::Path;

use rand::Rng;
use rand_distr::{Beta, Distribution, StandardNormal};
use statrs::distribution::{ChiSquared, ContinuousCDF};
use statrs::function::{beta as sbeta, erf, gamma};

use crate::error::{Error, Result};
use crate::rng::Stream;

const MIN_WEIGHT: f64 = 1e-12;

/// `nu = sum_i w_i delta_{y_i}`, points stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteTarget {
    points: Vec<f64>,
    dim: usize,
    weights: Vec<f64>,
}

impl DiscreteTarget {
    /// Builds a target from row-major points and unnormalized weights.
    ///
    /// Weights are rescaled to sum to one; any weight at or below `1e-12`
    /// after rescaling, or duplicated support point, is rejected.
    pub fn new(points: Vec<f64>, dim: usize, weights: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("target dimension must be >= 1"));
        }
        let m = weights.len();
        if m == 0 {
            return Err(Error::invalid("target needs at least one point"));
        }
        if points.len() != m * dim {
            return Err(Error::invalid(format!(
                "expected {} coordinates for {m} points in dimension {dim}, got {}",
                m * dim,
                points.len()
            )));
        }
        if points.iter().chain(&weights).any(|v| !v.is_finite()) {
            return Err(Error::invalid("non-finite target coordinate or weight"));
        }
        if weights.iter().any(|&w| w < 0.0) {
            return Err(Error::invalid("negative target weight"));
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::invalid("target weights sum to zero"));
        }
        let weights: Vec<f64> = weights.iter().map(|w| w / total).collect();
        if let Some(i) = weights.iter().position(|&w| w <= MIN_WEIGHT) {
            return Err(Error::invalid(format!("target weight {i} is (numerically) zero")));
        }

        let mut order: Vec<usize> = (0..m).collect();
        let row = |i: usize| &points[i * dim..(i + 1) * dim];
        order.sort_by(|&a, &b| {
            row(a)
                .iter()
                .zip(row(b))
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        if let Some(w) = order.windows(2).find(|w| row(w[0]) == row(w[1])) {
            return Err(Error::invalid(format!("target points {} and {} coincide", w[0], w[1])));
        }

        Ok(Self { points, dim, weights })
    }

    /// Uniform weights.
    pub fn uniform(points: Vec<f64>, dim: usize) -> Result<Self> {
        let m = points.len().checked_div(dim).unwrap_or(0);
        Self::new(points, dim, vec![1.0; m])
    }

    /// Same support, new weights.
    pub fn with_weights(&self, weights: Vec<f64>) -> Result<Self> {
        Self::new(self.points.clone(), self.dim, weights)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn min_weight(&self) -> f64 {
        self.weights.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter_points(&self) -> std::slice::ChunksExact<'_, f64> {
        self.points.chunks_exact(self.dim)
    }

    /// Parses the plain-text format: a header line `M d`, then `M` lines of
    /// `d` coordinates followed by a weight. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut numbers = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or(""))
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());

        let (_, header) = numbers.next().ok_or_else(|| Error::invalid("empty target file"))?;
        let head: Vec<&str> = header.split_whitespace().collect();
        let parse_usize = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| Error::invalid(format!("bad header field {s:?}")))
        };
        if head.len() != 2 {
            return Err(Error::invalid("target header must be `M d`"));
        }
        let (m, dim) = (parse_usize(head[0])?, parse_usize(head[1])?);

        let mut points = Vec::with_capacity(m * dim);
        let mut weights = Vec::with_capacity(m);
        for (lineno, line) in numbers {
            let vals = line
                .split_whitespace()
                .map(|s| s.parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::invalid(format!("line {}: {e}", lineno + 1)))?;
            if vals.len() != dim + 1 {
                return Err(Error::invalid(format!(
                    "line {}: expected {} numbers, got {}",
                    lineno + 1,
                    dim + 1,
                    vals.len()
                )));
            }
            points.extend_from_slice(&vals[..dim]);
            weights.push(vals[dim]);
        }
        if weights.len() != m {
            return Err(Error::invalid(format!("header declares {m} points, found {}", weights.len())));
        }
        Self::new(points, dim, weights)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    /// Inverse of [`DiscreteTarget::parse`], full precision.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.len(), self.dim);
        for (y, w) in self.iter_points().zip(&self.weights) {
            for v in y {
                out.push_str(&format!("{v:e} "));
            }
            out.push_str(&format!("{w:e}\n"));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixtureComponent {
    pub weight: f64,
    pub mean: Vec<f64>,
    pub scale: f64,
}

/// Source measure `mu`. Samplers are driven by an explicit [`Stream`].
#[derive(Debug, Clone, PartialEq)]
pub enum SourceMeasure {
    /// Uniform on `[lo, hi]^dim`.
    UniformCube { dim: usize, lo: f64, hi: f64 },
    /// `N(mean, scale^2 I)`.
    Gaussian { mean: Vec<f64>, scale: f64 },
    /// Density proportional to `(1 + |x|)^-exponent` on `R^dim`, `exponent > dim`.
    HeavyTailRadial { dim: usize, exponent: f64 },
    /// Density `1 / (2 sqrt(x))` on `(0, 1]`.
    SqrtDensity1D,
    /// Density `1 + 2 delta (1 - 2x)` on `[0, 1]`, `delta in [0, 1/2]`.
    PerturbedUniform1D { delta: f64 },
    /// Isotropic Gaussian mixture.
    GaussianMixture { components: Vec<MixtureComponent> },
}

fn std_normal_cdf(z: f64) -> f64 {
    0.5 * erf::erfc(-z / std::f64::consts::SQRT_2)
}

fn std_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Bisection for a nondecreasing function, to an absolute tolerance `1e-13`.
pub(crate) fn invert_monotone(f: impl Fn(f64) -> f64, target: f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut step = 1.0;
    while f(lo) > target {
        lo -= step;
        step *= 2.0;
    }
    step = 1.0;
    while f(hi) < target {
        hi += step;
        step *= 2.0;
    }
    while hi - lo > 1e-13 * (1.0 + lo.abs().max(hi.abs())) {
        let mid = 0.5 * (lo + hi);
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

impl SourceMeasure {
    pub fn uniform_cube(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        if dim == 0 || !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::invalid(format!("bad uniform cube dim={dim} [{lo}, {hi}]")));
        }
        Ok(Self::UniformCube { dim, lo, hi })
    }

    pub fn gaussian(mean: Vec<f64>, scale: f64) -> Result<Self> {
        if mean.is_empty() || !(scale > 0.0) || mean.iter().any(|m| !m.is_finite()) {
            return Err(Error::invalid("gaussian needs a finite mean and scale > 0"));
        }
        Ok(Self::Gaussian { mean, scale })
    }

    pub fn heavy_tail(dim: usize, exponent: f64) -> Result<Self> {
        if dim == 0 || !(exponent > dim as f64) {
            return Err(Error::invalid(format!(
                "heavy-tail radial needs exponent > dim, got dim={dim} exponent={exponent}"
            )));
        }
        Ok(Self::HeavyTailRadial { dim, exponent })
    }

    pub fn perturbed_uniform(delta: f64) -> Result<Self> {
        if !(0.0..=0.5).contains(&delta) {
            return Err(Error::invalid(format!("perturbation delta must be in [0, 1/2], got {delta}")));
        }
        Ok(Self::PerturbedUniform1D { delta })
    }

    pub fn mixture(mut components: Vec<MixtureComponent>) -> Result<Self> {
        let dim = components.first().map(|c| c.mean.len()).unwrap_or(0);
        if dim == 0
            || components
                .iter()
                .any(|c| c.mean.len() != dim || !(c.scale > 0.0) || !(c.weight > 0.0))
        {
            return Err(Error::invalid("mixture components need equal dims, scale > 0, weight > 0"));
        }
        let total: f64 = components.iter().map(|c| c.weight).sum();
        for c in &mut components {
            c.weight /= total;
        }
        Ok(Self::GaussianMixture { components })
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::UniformCube { dim, .. } | Self::HeavyTailRadial { dim, .. } => *dim,
            Self::Gaussian { mean, .. } => mean.len(),
            Self::SqrtDensity1D | Self::PerturbedUniform1D { .. } => 1,
            Self::GaussianMixture { components } => components[0].mean.len(),
        }
    }

    /// Draws one point into `out` (length `dim`).
    pub fn sample_into(&self, rng: &mut Stream, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.dim());
        match self {
            Self::UniformCube { lo, hi, .. } => {
                for v in out.iter_mut() {
                    *v = lo + (hi - lo) * rng.random::<f64>();
                }
            }
            Self::Gaussian { mean, scale } => {
                for (v, m) in out.iter_mut().zip(mean) {
                    let z: f64 = rng.sample(StandardNormal);
                    *v = m + scale * z;
                }
            }
            Self::HeavyTailRadial { dim, exponent } => {
                // R / (1 + R) ~ Beta(d, a - d) for density (1 + |x|)^-a
                let beta = Beta::new(*dim as f64, exponent - *dim as f64).expect("validated shape");
                let t: f64 = beta.sample(rng);
                let r = t / (1.0 - t);
                let mut norm2 = 0.0;
                while norm2 == 0.0 {
                    norm2 = 0.0;
                    for v in out.iter_mut() {
                        *v = rng.sample(StandardNormal);
                        norm2 += *v * *v;
                    }
                }
                let s = r / norm2.sqrt();
                for v in out.iter_mut() {
                    *v *= s;
                }
            }
            Self::SqrtDensity1D => {
                let u: f64 = rng.random();
                out[0] = u * u;
            }
            Self::PerturbedUniform1D { delta } => {
                out[0] = perturbed_quantile(*delta, rng.random());
            }
            Self::GaussianMixture { components } => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let mut pick = components.len() - 1;
                for (i, c) in components.iter().enumerate() {
                    acc += c.weight;
                    if u < acc {
                        pick = i;
                        break;
                    }
                }
                let c = &components[pick];
                for (v, m) in out.iter_mut().zip(&c.mean) {
                    let z: f64 = rng.sample(StandardNormal);
                    *v = m + c.scale * z;
                }
            }
        }
    }

    /// `n` i.i.d. draws, row-major.
    pub fn sample(&self, rng: &mut Stream, n: usize) -> Vec<f64> {
        let d = self.dim();
        let mut out = vec![0.0; n * d];
        for x in out.chunks_exact_mut(d) {
            self.sample_into(rng, x);
        }
        out
    }

    pub fn density(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::invalid("density: dimension mismatch"));
        }
        let d = self.dim() as f64;
        Ok(match self {
            Self::UniformCube { lo, hi, .. } => {
                if x.iter().all(|v| (*lo..=*hi).contains(v)) {
                    (hi - lo).powf(-d)
                } else {
                    0.0
                }
            }
            Self::Gaussian { mean, scale } => gaussian_density(x, mean, *scale),
            Self::HeavyTailRadial { exponent, .. } => {
                // normalizer: |S^{d-1}| * B(d, a - d)
                let ln_sphere = std::f64::consts::LN_2 + 0.5 * d * std::f64::consts::PI.ln()
                    - gamma::ln_gamma(0.5 * d);
                let ln_norm = ln_sphere + sbeta::ln_beta(d, exponent - d);
                let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                (-exponent * (1.0 + r).ln() - ln_norm).exp()
            }
            Self::SqrtDensity1D => {
                if x[0] > 0.0 && x[0] <= 1.0 {
                    0.5 / x[0].sqrt()
                } else {
                    0.0
                }
            }
            Self::PerturbedUniform1D { delta } => {
                if (0.0..=1.0).contains(&x[0]) {
                    1.0 + 2.0 * delta * (1.0 - 2.0 * x[0])
                } else {
                    0.0
                }
            }
            Self::GaussianMixture { components } => components
                .iter()
                .map(|c| c.weight * gaussian_density(x, &c.mean, c.scale))
                .sum(),
        })
    }

    fn require_1d(&self, what: &str) -> Result<()> {
        if self.dim() != 1 {
            return Err(Error::Unavailable(format!("{what} is only defined for 1-D sources")));
        }
        Ok(())
    }

    /// Exact CDF of a 1-D source.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        self.require_1d("cdf")?;
        Ok(match self {
            Self::UniformCube { lo, hi, .. } => ((x - lo) / (hi - lo)).clamp(0.0, 1.0),
            Self::Gaussian { mean, scale } => std_normal_cdf((x - mean[0]) / scale),
            Self::HeavyTailRadial { exponent, .. } => {
                let tail = 0.5 * (1.0 + x.abs()).powf(1.0 - exponent);
                if x >= 0.0 {
                    1.0 - tail
                } else {
                    tail
                }
            }
            Self::SqrtDensity1D => x.clamp(0.0, 1.0).sqrt(),
            Self::PerturbedUniform1D { delta } => {
                let x = x.clamp(0.0, 1.0);
                x + 2.0 * delta * x * (1.0 - x)
            }
            Self::GaussianMixture { components } => components
                .iter()
                .map(|c| c.weight * std_normal_cdf((x - c.mean[0]) / c.scale))
                .sum(),
        })
    }

    /// Quantile function of a 1-D source; closed form where one exists,
    /// bisection on the CDF otherwise.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        self.require_1d("quantile")?;
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::invalid(format!("quantile level {u} outside [0, 1]")));
        }
        Ok(match self {
            Self::UniformCube { lo, hi, .. } => lo + (hi - lo) * u,
            Self::SqrtDensity1D => u * u,
            Self::PerturbedUniform1D { delta } => perturbed_quantile(*delta, u),
            Self::HeavyTailRadial { exponent, .. } => {
                let k = exponent - 1.0;
                if u >= 0.5 {
                    (2.0 * (1.0 - u)).powf(-1.0 / k) - 1.0
                } else {
                    1.0 - (2.0 * u).powf(-1.0 / k)
                }
            }
            Self::Gaussian { mean, scale } => {
                if u == 0.5 {
                    mean[0]
                } else {
                    let m = mean[0];
                    invert_monotone(|x| self.cdf(x).unwrap_or(0.0), u, m - *scale, m + *scale)
                }
            }
            Self::GaussianMixture { .. } => {
                invert_monotone(|x| self.cdf(x).unwrap_or(0.0), u, -1.0, 1.0)
            }
        })
    }

    /// `mu(B(0, r))`.
    pub fn ball_mass(&self, r: f64) -> Result<f64> {
        if r < 0.0 {
            return Err(Error::invalid("ball radius must be >= 0"));
        }
        if self.dim() == 1 {
            // all 1-D kinds are atomless
            return Ok(self.cdf(r)? - self.cdf(-r)?);
        }
        match self {
            Self::Gaussian { mean, scale } if mean.iter().all(|&m| m == 0.0) => {
                let chi = ChiSquared::new(mean.len() as f64).expect("dof >= 1");
                Ok(chi.cdf((r / scale).powi(2)))
            }
            Self::HeavyTailRadial { dim, exponent } => {
                let d = *dim as f64;
                Ok(sbeta::beta_reg(d, exponent - d, r / (1.0 + r)))
            }
            _ => Err(Error::Unavailable(format!("no closed-form ball mass for {self:?}"))),
        }
    }

    /// Smallest `r` with `mu(B(0, r)) >= q`.
    pub fn norm_quantile(&self, q: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&q) {
            return Err(Error::invalid(format!("norm quantile level {q} outside [0, 1)")));
        }
        self.ball_mass(1.0)?;
        Ok(invert_monotone(|r| self.ball_mass(r.max(0.0)).unwrap_or(0.0), q, 0.0, 1.0).max(0.0))
    }
}

fn gaussian_density(x: &[f64], mean: &[f64], scale: f64) -> f64 {
    x.iter()
        .zip(mean)
        .map(|(v, m)| std_normal_pdf((v - m) / scale) / scale)
        .product()
}

/// Inverse of `F(x) = x + 2 delta x (1 - x)` on `[0, 1]`.
fn perturbed_quantile(delta: f64, u: f64) -> f64 {
    if delta == 0.0 {
        return u;
    }
    // 2 delta x^2 - (1 + 2 delta) x + u = 0, smaller root; rationalized form
    // 2u / (b + sqrt(b^2 - 8 delta u)) avoids cancellation near u = 0.
    let b = 1.0 + 2.0 * delta;
    let disc = (b * b - 8.0 * delta * u).max(0.0);
    (2.0 * u / (b + disc.sqrt())).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StreamKey;

    #[test]
    fn target_normalizes_and_validates() {
        let t = DiscreteTarget::new(vec![0.0, 1.0, 2.0], 1, vec![1.0, 1.0, 2.0]).unwrap();
        assert!((t.weights().iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert_eq!(t.weights()[2], 0.5);
        assert!(DiscreteTarget::new(vec![0.0, 0.0], 1, vec![1.0, 1.0]).is_err());
        assert!(DiscreteTarget::new(vec![0.0, 1.0], 1, vec![1.0, 0.0]).is_err());
        assert!(DiscreteTarget::new(vec![0.0, 1.0], 1, vec![1.0, -1.0]).is_err());
        assert!(DiscreteTarget::new(vec![0.0, 1.0, 2.0], 2, vec![1.0, 1.0]).is_err());
        assert!(DiscreteTarget::new(vec![0.0, 1.0], 1, vec![1.0, 1e-14]).is_err());
    }

    #[test]
    fn target_text_format() {
        let text = "# two points\n2 2\n0 0 0.25  # left\n1 0.5 0.75\n";
        let t = DiscreteTarget::parse(text).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.point(1), &[1.0, 0.5]);
        assert_eq!(t.weights(), &[0.25, 0.75]);
        assert_eq!(DiscreteTarget::parse(&t.to_text()).unwrap(), t);
        assert!(DiscreteTarget::parse("2 1\n0 1\n").is_err());
        assert!(DiscreteTarget::parse("1 1\n0 1 2\n").is_err());
        assert!(DiscreteTarget::parse("1 1\nzero 1\n").is_err());
    }

    #[test]
    fn uniform_samples_stay_in_cube() {
        let src = SourceMeasure::uniform_cube(2, 0.0, 1.0).unwrap();
        let xs = src.sample(&mut StreamKey::new(1).stream(), 10_000);
        assert!(xs.iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn density_examples() {
        let s = SourceMeasure::SqrtDensity1D;
        assert!((s.density(&[0.25]).unwrap() - 1.0).abs() < 1e-15);
        let p = SourceMeasure::perturbed_uniform(0.1).unwrap();
        assert!((p.density(&[0.0]).unwrap() - 1.2).abs() < 1e-15);
        let g = SourceMeasure::gaussian(vec![0.0], 1.0).unwrap();
        assert!((g.density(&[0.0]).unwrap() - 0.398_942_280_401_432_7).abs() < 1e-15);
    }

    #[test]
    fn cdf_examples() {
        assert!((SourceMeasure::SqrtDensity1D.cdf(0.25).unwrap() - 0.5).abs() < 1e-15);
        for delta in [0.05, 0.1, 0.2] {
            let p = SourceMeasure::perturbed_uniform(delta).unwrap();
            let m = (1.0 + 2.0 * delta - (1.0 + 4.0 * delta * delta).sqrt()) / (4.0 * delta);
            assert!((p.cdf(m).unwrap() - 0.5).abs() < 1e-12);
            assert!((p.quantile(0.5).unwrap() - m).abs() < 1e-12);
        }
        let g = SourceMeasure::gaussian(vec![0.3], 1.0).unwrap();
        assert!((g.cdf(0.3).unwrap() - 0.5).abs() < 1e-15);
        assert!(SourceMeasure::uniform_cube(2, 0.0, 1.0).unwrap().cdf(0.5).is_err());
    }

    #[test]
    fn perturbed_density_integrates_to_one() {
        // midpoint rule is exact for the linear density
        let p = SourceMeasure::perturbed_uniform(0.3).unwrap();
        let n = 1000;
        let total: f64 = (0..n)
            .map(|i| p.density(&[(i as f64 + 0.5) / n as f64]).unwrap() / n as f64)
            .sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn quantiles_invert_cdfs() {
        let kinds = [
            SourceMeasure::gaussian(vec![0.2], 1.5).unwrap(),
            SourceMeasure::SqrtDensity1D,
            SourceMeasure::perturbed_uniform(0.4).unwrap(),
            SourceMeasure::heavy_tail(1, 4.0).unwrap(),
            SourceMeasure::uniform_cube(1, -1.0, 3.0).unwrap(),
            SourceMeasure::mixture(vec![
                MixtureComponent { weight: 1.0, mean: vec![-2.0], scale: 0.5 },
                MixtureComponent { weight: 3.0, mean: vec![1.0], scale: 1.0 },
            ])
            .unwrap(),
        ];
        for src in &kinds {
            for u in [0.01, 0.2, 0.5, 0.77, 0.99] {
                let x = src.quantile(u).unwrap();
                assert!((src.cdf(x).unwrap() - u).abs() < 1e-11, "{src:?} at {u}");
            }
        }
    }

    #[test]
    fn heavy_tail_density_normalized_1d() {
        // 1-D: c (1+|x|)^-a with c = (a-1)/2
        let src = SourceMeasure::heavy_tail(1, 4.0).unwrap();
        assert!((src.density(&[0.0]).unwrap() - 1.5).abs() < 1e-12);
        assert!((src.density(&[1.0]).unwrap() - 1.5 / 16.0).abs() < 1e-12);
    }

    #[test]
    fn ball_mass_and_norm_quantile() {
        let g = SourceMeasure::gaussian(vec![0.0], 1.0).unwrap();
        let r = g.norm_quantile(0.9375).unwrap();
        assert!((r - 1.862_731_867_421_651_5).abs() < 1e-9);
        let g3 = SourceMeasure::gaussian(vec![0.0; 3], 1.0).unwrap();
        assert!((g3.ball_mass(g3.norm_quantile(0.9).unwrap()).unwrap() - 0.9).abs() < 1e-10);
        let ht = SourceMeasure::heavy_tail(10, 13.0).unwrap();
        assert!((ht.ball_mass(ht.norm_quantile(0.99).unwrap()).unwrap() - 0.99).abs() < 1e-10);
        assert!(SourceMeasure::uniform_cube(3, 0.0, 1.0).unwrap().ball_mass(1.0).is_err());
    }

    #[test]
    fn seed_determinism() {
        let src = SourceMeasure::heavy_tail(3, 6.0).unwrap();
        let k = StreamKey::new(99).child(4);
        assert_eq!(src.sample(&mut k.stream(), 100), src.sample(&mut k.stream(), 100));
        assert_ne!(src.sample(&mut k.stream(), 10), src.sample(&mut k.child(1).stream(), 10));
    }
}
