//! Seeded generators for the synthetic benchmark datasets.
//!
//! Every generator is a pure function of its parameters and an [`RngHandle`],
//! so the same (spec, seed) pair reproduces the same dataset bit for bit.
//! Generators that embed draw their sample coordinates and their rotation
//! from separate substreams, which keeps the rotation independent of the
//! sample count.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::data::{DataSet, RngHandle};
use crate::error::{Error, Result};

/// Substream used for sample coordinates.
const STREAM_COORDS: u64 = 0;
/// Substream used for the embedding rotation.
const STREAM_ROTATION: u64 = 1;
/// Substream used for additive noise.
const STREAM_NOISE: u64 = 2;
/// Substream used for the second component of a union.
const STREAM_SECOND: u64 = 3;

/// Bitmap side for blob images.
pub const BLOB_SIDE: usize = 81;

/// Draws a Haar-distributed rotation of R^dim via QR of a Gaussian matrix
/// with the R diagonal signs fixed.
fn haar_rotation(dim: usize, rng: &RngHandle) -> DMatrix<f64> {
    let mut r = rng.rng();
    let g: DMatrix<f64> = DMatrix::from_fn(dim, dim, |_, _| StandardNormal.sample(&mut r));
    let qr = g.qr();
    let mut q = qr.q();
    let rr = qr.r();
    for j in 0..dim {
        if rr[(j, j)] < 0.0 {
            for i in 0..dim {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    q
}

fn rotate_padded(rows: &DataSet, q: &DMatrix<f64>, dim: usize) -> Vec<f64> {
    let qs = q.as_slice(); // column-major, dim x dim
    let mut out = vec![0.0f64; rows.n_samples() * dim];
    for (sample, row) in rows.rows().enumerate() {
        let dst = &mut out[sample * dim..(sample + 1) * dim];
        for (b, &v) in row.iter().enumerate() {
            if v != 0.0 {
                let col = &qs[b * dim..(b + 1) * dim];
                for (d, c) in dst.iter_mut().zip(col) {
                    *d += c * v;
                }
            }
        }
    }
    out
}

/// Appends `target_dim - d` zero coordinates, then applies a random
/// orthogonal rotation of the target space. An isometry of the samples.
pub fn linear_embed(data: &DataSet, target_dim: usize, rng: &RngHandle) -> Result<DataSet> {
    if target_dim < data.ambient_dim() {
        return Err(Error::InvalidSpec(format!(
            "embedding dimension {target_dim} below intrinsic dimension {}",
            data.ambient_dim()
        )));
    }
    let q = haar_rotation(target_dim, rng);
    DataSet::new(rotate_padded(data, &q, target_dim), data.n_samples(), target_dim)
}

fn draw_matrix<F: FnMut(&mut rand_chacha::ChaCha12Rng) -> f64>(
    d: usize,
    n: usize,
    rng: &RngHandle,
    mut draw: F,
) -> Vec<f64> {
    let mut r = rng.rng();
    (0..n * d).map(|_| draw(&mut r)).collect()
}

fn check_embedding(d: usize, target_dim: usize) -> Result<()> {
    if d == 0 {
        return Err(Error::InvalidSpec("intrinsic dimension must be positive".into()));
    }
    if target_dim < d {
        return Err(Error::InvalidSpec(format!(
            "embedding dimension {target_dim} below intrinsic dimension {d}"
        )));
    }
    Ok(())
}

/// Uniform samples of [0, 1]^d, linearly embedded into R^target_dim.
pub fn gen_hypercube(d: usize, target_dim: usize, n: usize, rng: &RngHandle) -> Result<DataSet> {
    check_embedding(d, target_dim)?;
    let coords = draw_matrix(d, n, &rng.substream(STREAM_COORDS), |r| r.random::<f64>());
    let base = DataSet::new(coords, n, d)?;
    linear_embed(&base, target_dim, &rng.substream(STREAM_ROTATION))
}

/// Uniform samples of {0, 1}^d, linearly embedded.
pub fn gen_binary(d: usize, target_dim: usize, n: usize, rng: &RngHandle) -> Result<DataSet> {
    check_embedding(d, target_dim)?;
    let coords = draw_matrix(d, n, &rng.substream(STREAM_COORDS), |r| {
        if r.random::<bool>() {
            1.0
        } else {
            0.0
        }
    });
    let base = DataSet::new(coords, n, d)?;
    linear_embed(&base, target_dim, &rng.substream(STREAM_ROTATION))
}

/// Standard Gaussian samples of R^d, linearly embedded.
pub fn gen_gaussian(d: usize, target_dim: usize, n: usize, rng: &RngHandle) -> Result<DataSet> {
    check_embedding(d, target_dim)?;
    let coords = draw_matrix(d, n, &rng.substream(STREAM_COORDS), |r| {
        StandardNormal.sample(r)
    });
    let base = DataSet::new(coords, n, d)?;
    linear_embed(&base, target_dim, &rng.substream(STREAM_ROTATION))
}

/// Uniform samples of the d-sphere of radius `r_s` in R^{d+1}, by
/// normalizing Gaussian directions.
pub fn gen_sphere(d_sphere: usize, n: usize, r_s: f64, rng: &RngHandle) -> Result<DataSet> {
    if d_sphere == 0 {
        return Err(Error::InvalidSpec("sphere dimension must be at least 1".into()));
    }
    if !(r_s > 0.0) {
        return Err(Error::InvalidSpec(format!("sphere radius must be positive, got {r_s}")));
    }
    let dim = d_sphere + 1;
    let mut r = rng.substream(STREAM_COORDS).rng();
    let mut points = Vec::with_capacity(n * dim);
    for _ in 0..n {
        loop {
            let dir: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut r)).collect();
            let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 1e-150 {
                points.extend(dir.iter().map(|v| v * r_s / norm));
                break;
            }
        }
    }
    DataSet::new(points, n, dim)
}

/// Uniform samples of [0, 2 pi]^d pushed through the circular embedding
/// (x_2 cos x_1, x_2 sin x_1, ..., x_1 cos x_d, x_1 sin x_d), giving D = 2d.
pub fn gen_cmanifold(d: usize, n: usize, rng: &RngHandle) -> Result<DataSet> {
    if d < 2 {
        return Err(Error::InvalidSpec(
            "the circular manifold needs intrinsic dimension at least 2".into(),
        ));
    }
    let tau = 2.0 * std::f64::consts::PI;
    let mut r = rng.substream(STREAM_COORDS).rng();
    let mut points = Vec::with_capacity(n * 2 * d);
    let mut angles = vec![0.0f64; d];
    for _ in 0..n {
        for a in &mut angles {
            *a = tau * r.random::<f64>();
        }
        for i in 0..d {
            let succ = angles[(i + 1) % d];
            points.push(succ * angles[i].cos());
            points.push(succ * angles[i].sin());
        }
    }
    DataSet::new(points, n, 2 * d)
}

/// The Swiss roll surface: (x, y) uniform on [0, 1]^2 mapped to
/// (x cos 2 pi y, y, x sin 2 pi y).
pub fn gen_swissroll(n: usize, rng: &RngHandle) -> Result<DataSet> {
    let tau = 2.0 * std::f64::consts::PI;
    let mut r = rng.substream(STREAM_COORDS).rng();
    let mut points = Vec::with_capacity(n * 3);
    for _ in 0..n {
        let x = r.random::<f64>();
        let y = r.random::<f64>();
        points.push(x * (tau * y).cos());
        points.push(y);
        points.push(x * (tau * y).sin());
    }
    DataSet::new(points, n, 3)
}

/// Generative parameters of one high-contrast blob.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlobParams {
    /// Horizontal translation, uniform in (-20, 20).
    pub dx: f64,
    /// Vertical translation, uniform in (-20, 20).
    pub dy: f64,
    /// Size, uniform in (1, 3).
    pub s: f64,
    /// Eccentricity factor, uniform in (5, 10).
    pub e: f64,
    /// Major-axis angle, uniform in (-pi/2, pi/2).
    pub theta: f64,
}

impl BlobParams {
    fn sample(r: &mut rand_chacha::ChaCha12Rng) -> Self {
        let half_pi = std::f64::consts::FRAC_PI_2;
        Self {
            dx: r.random_range(-20.0..20.0),
            dy: r.random_range(-20.0..20.0),
            s: r.random_range(1.0..3.0),
            e: r.random_range(5.0..10.0),
            theta: r.random_range(-half_pi..half_pi),
        }
    }
}

/// Renders one blob on the 81 x 81 bitmap, flattened row-major.
///
/// Pixel indices run over centered integer coordinates -40..=40, so the
/// untranslated blob peaks mid-bitmap. Values below 0.01 are set to 0.
pub fn blob_image(params: &BlobParams) -> Vec<f64> {
    let half = (BLOB_SIDE as i64 - 1) / 2;
    let (sin_t, cos_t) = params.theta.sin_cos();
    let denom = (1.0 + params.e * params.e) * params.s * params.s;
    let mut image = Vec::with_capacity(BLOB_SIDE * BLOB_SIDE);
    for row in 0..BLOB_SIDE {
        let i = row as i64 as f64 - half as f64;
        for col in 0..BLOB_SIDE {
            let j = col as i64 as f64 - half as f64;
            let a = cos_t * (j - params.dx) + sin_t * (i + params.dy);
            let b = -sin_t * (j - params.dx) + cos_t * (i + params.dy);
            let v = 1.0 - ((a * a + params.e * params.e * b * b) / denom).sqrt();
            image.push(if v < 0.01 { 0.0 } else { v });
        }
    }
    image
}

/// Dataset of flattened 81 x 81 images, each the sum of `n_blobs`
/// independently drawn single-blob images.
pub fn gen_blobs(n_blobs: usize, n: usize, rng: &RngHandle) -> Result<DataSet> {
    if n_blobs == 0 {
        return Err(Error::InvalidSpec("blob count must be at least 1".into()));
    }
    let dim = BLOB_SIDE * BLOB_SIDE;
    let mut r = rng.substream(STREAM_COORDS).rng();
    let mut points = vec![0.0f64; n * dim];
    for sample in 0..n {
        let dst = &mut points[sample * dim..(sample + 1) * dim];
        for _ in 0..n_blobs {
            let params = BlobParams::sample(&mut r);
            for (d, v) in dst.iter_mut().zip(blob_image(&params)) {
                *d += v;
            }
        }
    }
    DataSet::new(points, n, dim)
}

/// Adds i.i.d. N(0, sigma^2) noise to every coordinate.
pub fn add_gaussian_noise(data: &DataSet, sigma: f64, rng: &RngHandle) -> Result<DataSet> {
    if !(sigma >= 0.0) {
        return Err(Error::InvalidSpec(format!(
            "noise standard deviation must be non-negative, got {sigma}"
        )));
    }
    if sigma == 0.0 {
        return Ok(data.clone());
    }
    let mut r = rng.substream(STREAM_NOISE).rng();
    let noisy: Vec<f64> = data
        .values()
        .iter()
        .map(|v| {
            let z: f64 = StandardNormal.sample(&mut r);
            v + sigma * z
        })
        .collect();
    DataSet::new(noisy, data.n_samples(), data.ambient_dim())
}

/// Concatenates the rows of two datasets with equal ambient dimension.
pub fn union(a: &DataSet, b: &DataSet) -> Result<DataSet> {
    if !a.is_empty() && !b.is_empty() && a.ambient_dim() != b.ambient_dim() {
        return Err(Error::DimensionMismatch {
            left: a.ambient_dim(),
            right: b.ambient_dim(),
        });
    }
    if a.is_empty() {
        return Ok(b.clone());
    }
    if b.is_empty() {
        return Ok(a.clone());
    }
    let mut points = Vec::with_capacity((a.n_samples() + b.n_samples()) * a.ambient_dim());
    points.extend_from_slice(a.values());
    points.extend_from_slice(b.values());
    DataSet::new(points, a.n_samples() + b.n_samples(), a.ambient_dim())
}

/// Union of two hypercube datasets embedded with one shared rotation.
///
/// Both cubes are sampled in [0, 1]^{d_i}, zero-padded to the target
/// dimension and rotated by the same orthogonal matrix, so the lower cube
/// lies on a face of the higher one and the two clouds genuinely intersect.
/// Optional per-cube offsets translate each cube before embedding.
pub fn gen_hypercube_union_with_offsets(
    d1: usize,
    d2: usize,
    target_dim: usize,
    n1: usize,
    n2: usize,
    offset1: Option<&[f64]>,
    offset2: Option<&[f64]>,
    rng: &RngHandle,
) -> Result<DataSet> {
    check_embedding(d1, target_dim)?;
    check_embedding(d2, target_dim)?;
    let cube = |d: usize, n: usize, stream: u64, offset: Option<&[f64]>| -> Result<DataSet> {
        let mut coords = draw_matrix(d, n, &rng.substream(stream), |r| r.random::<f64>());
        if let Some(off) = offset {
            if off.len() != d {
                return Err(Error::InvalidSpec(format!(
                    "offset length {} does not match cube dimension {d}",
                    off.len()
                )));
            }
            for chunk in coords.chunks_exact_mut(d) {
                for (c, o) in chunk.iter_mut().zip(off) {
                    *c += o;
                }
            }
        }
        DataSet::new(coords, n, d)
    };
    let a = cube(d1, n1, STREAM_COORDS, offset1)?;
    let b = cube(d2, n2, STREAM_SECOND, offset2)?;
    let q = haar_rotation(target_dim, &rng.substream(STREAM_ROTATION));
    let mut points = rotate_padded(&a, &q, target_dim);
    points.extend(rotate_padded(&b, &q, target_dim));
    DataSet::new(points, n1 + n2, target_dim)
}

/// [`gen_hypercube_union_with_offsets`] with no offsets.
pub fn gen_hypercube_union(
    d1: usize,
    d2: usize,
    target_dim: usize,
    n1: usize,
    n2: usize,
    rng: &RngHandle,
) -> Result<DataSet> {
    gen_hypercube_union_with_offsets(d1, d2, target_dim, n1, n2, None, None, rng)
}

/// Dataset family selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Binary,
    Gaussian,
    Hypercube,
    CManifold,
    SwissRoll,
    Sphere,
    Blobs,
}

impl Family {
    pub fn as_str(&self) -> &'static str {
        match self {
            Family::Binary => "binary",
            Family::Gaussian => "gaussian",
            Family::Hypercube => "hypercube",
            Family::CManifold => "cmanifold",
            Family::SwissRoll => "swissroll",
            Family::Sphere => "sphere",
            Family::Blobs => "blobs",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "binary" => Ok(Family::Binary),
            "gaussian" => Ok(Family::Gaussian),
            "hypercube" => Ok(Family::Hypercube),
            "cmanifold" => Ok(Family::CManifold),
            "swissroll" => Ok(Family::SwissRoll),
            "sphere" => Ok(Family::Sphere),
            "blobs" => Ok(Family::Blobs),
            other => Err(Error::InvalidSpec(format!("unknown family '{other}'"))),
        }
    }
}

/// Full description of a synthetic dataset; (spec, seed) determines the data.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub family: Family,
    /// Intrinsic parameter (sphere dimension for `Sphere`; nominal degrees of
    /// freedom for `Blobs`).
    pub d: usize,
    pub ambient_dim: usize,
    pub n_samples: usize,
    pub seed: u64,
    /// Blob count (`Blobs` only).
    pub n_blobs: usize,
    /// Post-embedding Gaussian noise level; 0 disables.
    pub noise_sigma: f64,
    /// Sphere radius (`Sphere` only).
    pub sphere_radius: f64,
}

impl SyntheticSpec {
    pub fn new(family: Family, d: usize, ambient_dim: usize, n_samples: usize, seed: u64) -> Self {
        Self {
            family,
            d,
            ambient_dim,
            n_samples,
            seed,
            n_blobs: 1,
            noise_sigma: 0.0,
            sphere_radius: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidSpec(msg));
        match self.family {
            Family::Binary | Family::Gaussian | Family::Hypercube => {
                if self.d == 0 || self.ambient_dim < self.d {
                    return fail(format!(
                        "{} requires 1 <= d <= D, got d={} D={}",
                        self.family.as_str(),
                        self.d,
                        self.ambient_dim
                    ));
                }
            }
            Family::CManifold => {
                if self.d < 2 || self.ambient_dim != 2 * self.d {
                    return fail(format!(
                        "cmanifold requires d >= 2 and D = 2d, got d={} D={}",
                        self.d, self.ambient_dim
                    ));
                }
            }
            Family::SwissRoll => {
                if self.d != 2 || self.ambient_dim != 3 {
                    return fail(format!(
                        "swissroll fixes (d, D) = (2, 3), got d={} D={}",
                        self.d, self.ambient_dim
                    ));
                }
            }
            Family::Sphere => {
                if self.d == 0 || self.ambient_dim != self.d + 1 {
                    return fail(format!(
                        "sphere requires D = d + 1, got d={} D={}",
                        self.d, self.ambient_dim
                    ));
                }
                if !(self.sphere_radius > 0.0) {
                    return fail(format!("sphere radius must be positive, got {}", self.sphere_radius));
                }
            }
            Family::Blobs => {
                if self.n_blobs == 0 || self.ambient_dim != BLOB_SIDE * BLOB_SIDE {
                    return fail(format!(
                        "blobs fixes D = {} and needs n_blobs >= 1, got D={} n_blobs={}",
                        BLOB_SIDE * BLOB_SIDE,
                        self.ambient_dim,
                        self.n_blobs
                    ));
                }
            }
        }
        if !(self.noise_sigma >= 0.0) {
            return fail(format!("noise sigma must be non-negative, got {}", self.noise_sigma));
        }
        Ok(())
    }

    /// Generates the dataset this spec describes.
    pub fn generate(&self) -> Result<DataSet> {
        self.validate()?;
        let rng = RngHandle::new(self.seed);
        let clean = match self.family {
            Family::Binary => gen_binary(self.d, self.ambient_dim, self.n_samples, &rng)?,
            Family::Gaussian => gen_gaussian(self.d, self.ambient_dim, self.n_samples, &rng)?,
            Family::Hypercube => gen_hypercube(self.d, self.ambient_dim, self.n_samples, &rng)?,
            Family::CManifold => gen_cmanifold(self.d, self.n_samples, &rng)?,
            Family::SwissRoll => gen_swissroll(self.n_samples, &rng)?,
            Family::Sphere => gen_sphere(self.d, self.n_samples, self.sphere_radius, &rng)?,
            Family::Blobs => gen_blobs(self.n_blobs, self.n_samples, &rng)?,
        };
        add_gaussian_noise(&clean, self.noise_sigma, &rng)
    }

    /// Key=value sidecar text recording every field.
    pub fn sidecar(&self) -> String {
        format!(
            "family={}\nd={}\nD={}\nn={}\nseed={}\nn_blobs={}\nnoise_sigma={}\nsphere_radius={}\n",
            self.family.as_str(),
            self.d,
            self.ambient_dim,
            self.n_samples,
            self.seed,
            self.n_blobs,
            self.noise_sigma,
            self.sphere_radius
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::pairwise_distances;

    #[test]
    fn embedding_is_an_isometry() {
        let rng = RngHandle::new(5);
        let base = gen_gaussian(6, 6, 40, &rng).unwrap();
        let embedded = linear_embed(&base, 25, &rng.substream(99)).unwrap();
        assert_eq!(embedded.ambient_dim(), 25);
        let da = pairwise_distances(&base).unwrap();
        let db = pairwise_distances(&embedded).unwrap();
        for (a, b) in da.values().iter().zip(db.values()) {
            assert!((a - b).abs() <= 1e-10 * a.max(1.0));
        }
    }

    #[test]
    fn rotation_is_orthogonal() {
        let q = haar_rotation(30, &RngHandle::new(17));
        let prod = q.transpose() * &q;
        for i in 0..30 {
            for j in 0..30 {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((prod[(i, j)] - expected).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn square_embedding_preserves_norms() {
        let rng = RngHandle::new(2);
        let base = gen_gaussian(8, 8, 20, &rng).unwrap();
        let rotated = linear_embed(&base, 8, &rng.substream(1)).unwrap();
        for (a, b) in base.rows().zip(rotated.rows()) {
            let na: f64 = a.iter().map(|v| v * v).sum::<f64>().sqrt();
            let nb: f64 = b.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((na - nb).abs() < 1e-10 * na.max(1.0));
        }
    }

    #[test]
    fn hypercube_mean_is_centered() {
        let n = 4000;
        let rng = RngHandle::new(8);
        // Pre-embedding coordinates: embed into the same dimension d so the
        // marginal check runs on a pure rotation-free draw.
        let coords = draw_matrix(3, n, &rng.substream(STREAM_COORDS), |r| r.random::<f64>());
        let bound = 3.0 / (12.0 * n as f64).sqrt();
        for k in 0..3 {
            let mean: f64 = coords.iter().skip(k).step_by(3).sum::<f64>() / n as f64;
            assert!((mean - 0.5).abs() < bound, "coordinate {k}: mean {mean}");
        }
    }

    #[test]
    fn binary_coordinates_are_bits() {
        let rng = RngHandle::new(3);
        let coords = draw_matrix(5, 200, &rng.substream(STREAM_COORDS), |r| {
            if r.random::<bool>() {
                1.0
            } else {
                0.0
            }
        });
        assert!(coords.iter().all(|&v| v == 0.0 || v == 1.0));
        // Embedded dataset keeps the declared shape.
        let data = gen_binary(5, 12, 200, &rng).unwrap();
        assert_eq!((data.n_samples(), data.ambient_dim()), (200, 12));
    }

    #[test]
    fn gaussian_sample_covariance_is_near_identity() {
        let n = 3000;
        let d = 4;
        let rng = RngHandle::new(21);
        let coords = draw_matrix(d, n, &rng.substream(STREAM_COORDS), |r| {
            StandardNormal.sample(r)
        });
        let bound = 5.0 / (n as f64).sqrt();
        for a in 0..d {
            for b in 0..d {
                let mut acc = 0.0;
                for s in 0..n {
                    acc += coords[s * d + a] * coords[s * d + b];
                }
                let cov = acc / n as f64;
                let expected = if a == b { 1.0 } else { 0.0 };
                assert!((cov - expected).abs() < bound, "cov[{a}][{b}] = {cov}");
            }
        }
    }

    #[test]
    fn sphere_rows_have_exact_radius() {
        let data = gen_sphere(9, 500, 2.5, &RngHandle::new(4)).unwrap();
        assert_eq!(data.ambient_dim(), 10);
        for row in data.rows() {
            let norm: f64 = row.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((norm - 2.5).abs() < 1e-12);
        }
        let big = gen_sphere(3, 5000, 1.0, &RngHandle::new(11)).unwrap();
        let mut mean = vec![0.0f64; 4];
        for row in big.rows() {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        let norm: f64 = mean.iter().map(|v| (v / 5000.0) * (v / 5000.0)).sum::<f64>().sqrt();
        assert!(norm <= 5.0 / (5000.0f64).sqrt());
    }

    #[test]
    fn cmanifold_matches_the_map() {
        // phi(0, 0) = (0, 0, 0, 0) and phi(pi/2, pi) = (0, pi, -pi/2, 0).
        let map = |angles: &[f64]| -> Vec<f64> {
            let d = angles.len();
            let mut out = Vec::with_capacity(2 * d);
            for i in 0..d {
                let succ = angles[(i + 1) % d];
                out.push(succ * angles[i].cos());
                out.push(succ * angles[i].sin());
            }
            out
        };
        let zero = map(&[0.0, 0.0]);
        assert_eq!(zero, vec![0.0, 0.0, 0.0, 0.0]);
        let pi = std::f64::consts::PI;
        let v = map(&[pi / 2.0, pi]);
        assert!((v[0] - 0.0).abs() < 1e-12);
        assert!((v[1] - pi).abs() < 1e-12);
        assert!((v[2] + pi / 2.0).abs() < 1e-12);
        assert!(v[3].abs() < 1e-12);
        let data = gen_cmanifold(6, 10, &RngHandle::new(1)).unwrap();
        assert_eq!(data.ambient_dim(), 12);
        assert!(gen_cmanifold(1, 10, &RngHandle::new(1)).is_err());
    }

    #[test]
    fn swissroll_satisfies_the_map_identity() {
        let data = gen_swissroll(500, &RngHandle::new(6)).unwrap();
        assert_eq!(data.ambient_dim(), 3);
        for row in data.rows() {
            let radius_sq = row[0] * row[0] + row[2] * row[2];
            assert!(radius_sq <= 1.0 + 1e-12);
            assert!((0.0..=1.0).contains(&row[1]));
        }
        // Fixed parameter points: (1, 0) -> (1, 0, 0), (1, 0.25) -> (0, 0.25, 1).
        let tau = 2.0 * std::f64::consts::PI;
        let phi = |x: f64, y: f64| [x * (tau * y).cos(), y, x * (tau * y).sin()];
        let p = phi(1.0, 0.0);
        assert!((p[0] - 1.0).abs() < 1e-12 && p[1] == 0.0 && p[2].abs() < 1e-12);
        let q = phi(1.0, 0.25);
        assert!(q[0].abs() < 1e-12 && q[1] == 0.25 && (q[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn blob_peak_and_zero_crossing() {
        let params = BlobParams {
            dx: 0.0,
            dy: 0.0,
            s: 2.0,
            e: 7.0,
            theta: 0.0,
        };
        let image = blob_image(&params);
        let center = 40 * BLOB_SIDE + 40;
        assert_eq!(image[center], 1.0);
        // Along i = 0, the pre-threshold value crosses zero at |j| = s sqrt(1 + e^2).
        let crossing = params.s * (1.0 + params.e * params.e).sqrt();
        for col in 0..BLOB_SIDE {
            let j = col as f64 - 40.0;
            let v = image[40 * BLOB_SIDE + col];
            if j.abs() > crossing + 1.0 {
                assert_eq!(v, 0.0, "pixel at j={j} should be clipped");
            }
            if j.abs() < crossing - 1.0 {
                assert!(v > 0.0, "pixel at j={j} should be positive");
            }
        }
    }

    #[test]
    fn blob_values_are_thresholded_sums() {
        let single = gen_blobs(1, 30, &RngHandle::new(12)).unwrap();
        for &v in single.values() {
            assert!(v == 0.0 || (0.01..=1.0).contains(&v), "single-blob value {v}");
        }
        let triple = gen_blobs(3, 10, &RngHandle::new(12)).unwrap();
        for &v in triple.values() {
            assert!(v == 0.0 || (0.01..=3.0).contains(&v), "3-blob value {v}");
        }
    }

    #[test]
    fn noise_is_calibrated_and_optional() {
        let rng = RngHandle::new(31);
        let data = gen_gaussian(10, 10, 300, &rng).unwrap();
        let same = add_gaussian_noise(&data, 0.0, &rng).unwrap();
        assert_eq!(data, same);
        let sigma = 0.25;
        let noisy = add_gaussian_noise(&data, sigma, &rng).unwrap();
        let diffs: Vec<f64> = noisy
            .values()
            .iter()
            .zip(data.values())
            .map(|(a, b)| a - b)
            .collect();
        let m = diffs.len() as f64;
        let std = (diffs.iter().map(|v| v * v).sum::<f64>() / m).sqrt();
        assert!((std - sigma).abs() < 5.0 * sigma / m.sqrt());
    }

    #[test]
    fn union_concatenates_rows() {
        let rng = RngHandle::new(1);
        let a = gen_gaussian(3, 5, 7, &rng).unwrap();
        let b = gen_gaussian(2, 5, 4, &rng.substream(1)).unwrap();
        let u = union(&a, &b).unwrap();
        assert_eq!(u.n_samples(), 11);
        assert_eq!(u.row(0), a.row(0));
        assert_eq!(u.row(7), b.row(0));
        let empty = DataSet::new(vec![], 0, 5).unwrap();
        assert_eq!(union(&a, &empty).unwrap(), a);
        let mismatched = gen_gaussian(2, 4, 3, &rng).unwrap();
        assert!(union(&a, &mismatched).is_err());
    }

    #[test]
    fn generators_replay_bit_for_bit() {
        let specs = [
            SyntheticSpec::new(Family::Hypercube, 5, 20, 50, 123),
            SyntheticSpec::new(Family::Binary, 4, 10, 50, 123),
            SyntheticSpec::new(Family::Gaussian, 3, 8, 50, 123),
            SyntheticSpec::new(Family::CManifold, 3, 6, 50, 123),
            SyntheticSpec::new(Family::SwissRoll, 2, 3, 50, 123),
            SyntheticSpec::new(Family::Sphere, 4, 5, 50, 123),
        ];
        for spec in &specs {
            let a = spec.generate().unwrap();
            let b = spec.generate().unwrap();
            assert_eq!(a.values(), b.values(), "family {}", spec.family.as_str());
            assert_eq!(a.n_samples(), spec.n_samples);
            assert_eq!(a.ambient_dim(), spec.ambient_dim);
        }
        let mut blobs = SyntheticSpec::new(Family::Blobs, 5, BLOB_SIDE * BLOB_SIDE, 5, 7);
        blobs.n_blobs = 1;
        assert_eq!(
            blobs.generate().unwrap().values(),
            blobs.generate().unwrap().values()
        );
    }

    #[test]
    fn spec_validation_rejects_bad_shapes() {
        assert!(SyntheticSpec::new(Family::Hypercube, 10, 5, 10, 0)
            .validate()
            .is_err());
        assert!(SyntheticSpec::new(Family::SwissRoll, 2, 4, 10, 0)
            .validate()
            .is_err());
        assert!(SyntheticSpec::new(Family::CManifold, 3, 7, 10, 0)
            .validate()
            .is_err());
        assert!(SyntheticSpec::new(Family::Sphere, 3, 3, 10, 0)
            .validate()
            .is_err());
    }

    #[test]
    fn union_cubes_share_shape() {
        let data = gen_hypercube_union(3, 4, 10, 20, 30, &RngHandle::new(9)).unwrap();
        assert_eq!(data.n_samples(), 50);
        assert_eq!(data.ambient_dim(), 10);
        let again = gen_hypercube_union(3, 4, 10, 20, 30, &RngHandle::new(9)).unwrap();
        assert_eq!(data.values(), again.values());
    }
}
