//! Distance functions `d(x) = dist(x, K)` for a handful of model sets `K`,
//! finite-difference Laplacians, and the sign test
//! `(p - k)(d Δd + 1 - k) <= 0` (or `d Δd + 1 - k >= 0` when `p = k`).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, parameter, HardyError, Result};
use crate::params::HardyParams;

/// Two face distances closer than this mark a ridge point.
pub const RIDGE_GAP: f64 = 1e-9;
/// Verdict slack absorbing the finite-difference error of `Δd`.
pub const TOLERANCE_SLACK: f64 = 1e-4;
/// Smallest admissible distance to `K`.
pub const SINGULAR_DISTANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum ConvexShape {
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    /// Vertices of a convex polygon in the plane, in either orientation.
    Polygon {
        vertices: Vec<[f64; 2]>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CanalSide {
    Inner,
    Outer,
}

/// The set `K` together with the ambient dimension.
///
/// Canal geometries split `x = (y, z)` with `y` in the affine set
/// `E = R^{N-k+1}` (the leading coordinates) and `z ∈ R^{k-1}`; the convex
/// section `V ⊂ E` is the ball of radius `radius` about the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum KGeometry {
    /// `K = {center}` (the origin by default), `k = N`.
    Point {
        dim: usize,
        #[serde(default)]
        center: Option<Vec<f64>>,
    },
    /// `K` spanned by the first `N - k` coordinate axes.
    AffinePlane { dim: usize, codim: usize },
    /// `K = ∂Ω` for a convex `Ω`, `k = 1`.
    ConvexBoundary { shape: ConvexShape },
    /// A polygon made of segments, inscribed in the circle `∂V`, sampled
    /// inside the inner canal `V × E^⊥`; `k = N - 1`.
    PolytopeInCanal {
        dim: usize,
        radius: f64,
        faces: Vec<Segment>,
    },
    /// `K = ∂_E V` with `V` the ball of radius `radius` in `E`.
    CanalSection {
        dim: usize,
        codim: usize,
        radius: f64,
        side: CanalSide,
    },
}

/// Exact distance with its gradient and the bookkeeping needed for ridges.
#[derive(Debug, Clone)]
struct Nearest {
    d: f64,
    grad: Vec<f64>,
    /// Index of the nearest face, for faceted sets.
    face: Option<usize>,
    /// Gap between the two smallest face distances.
    gap: f64,
    /// Whether the nearest point lies in the relative interior of its face.
    interior: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistanceSample {
    pub x: Vec<f64>,
    pub d: f64,
    pub grad_d: Vec<f64>,
    pub laplacian_d: f64,
    /// Set at ties between faces, and when the difference stencil crosses
    /// one; `laplacian_d` is then meaningless.
    pub on_ridge: bool,
    /// For faceted sets: the nearest point is interior to its face.
    pub interior_projection: Option<bool>,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn segment_nearest(x: &[f64], s: &Segment) -> (f64, Vec<f64>, bool) {
    let ab: Vec<f64> = s.b.iter().zip(&s.a).map(|(b, a)| b - a).collect();
    let ax: Vec<f64> = x.iter().zip(&s.a).map(|(x, a)| x - a).collect();
    let len2: f64 = ab.iter().map(|v| v * v).sum();
    let t = (ax.iter().zip(&ab).map(|(u, v)| u * v).sum::<f64>() / len2).clamp(0.0, 1.0);
    let diff: Vec<f64> = x
        .iter()
        .zip(s.a.iter().zip(&ab))
        .map(|(x, (a, v))| x - (a + t * v))
        .collect();
    (norm(&diff), diff, t > 0.0 && t < 1.0)
}

fn faceted(x: &[f64], faces: &[Segment]) -> Nearest {
    let mut best = (f64::INFINITY, Vec::new(), false, 0usize);
    let mut second = f64::INFINITY;
    for (i, f) in faces.iter().enumerate() {
        let (d, diff, interior) = segment_nearest(x, f);
        if d < best.0 {
            second = best.0;
            best = (d, diff, interior, i);
        } else if d < second {
            second = d;
        }
    }
    let (d, diff, interior, face) = best;
    let grad = diff.iter().map(|v| v / d).collect();
    Nearest {
        d,
        grad,
        face: Some(face),
        gap: second - d,
        interior: Some(interior),
    }
}

fn polygon_faces(vertices: &[[f64; 2]]) -> Vec<Segment> {
    (0..vertices.len())
        .map(|i| {
            let a = vertices[i];
            let b = vertices[(i + 1) % vertices.len()];
            Segment {
                a: a.to_vec(),
                b: b.to_vec(),
            }
        })
        .collect()
}

fn polygon_orientation(vertices: &[[f64; 2]]) -> Result<f64> {
    let n = vertices.len();
    if n < 3 {
        return domain("a polygon needs at least three vertices");
    }
    let mut sign = 0.0;
    for i in 0..n {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        let c = vertices[(i + 2) % n];
        let cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]);
        if cross == 0.0 {
            return domain(format!(
                "polygon has collinear consecutive vertices at index {}",
                i + 1
            ));
        }
        if sign == 0.0 {
            sign = cross.signum();
        } else if cross.signum() != sign {
            return domain(format!(
                "polygon is not convex (turn changes sign at vertex {})",
                i + 1
            ));
        }
    }
    Ok(sign)
}

fn polygon_contains(vertices: &[[f64; 2]], orientation: f64, x: &[f64]) -> bool {
    let n = vertices.len();
    (0..n).all(|i| {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        let cross = (b[0] - a[0]) * (x[1] - a[1]) - (b[1] - a[1]) * (x[0] - a[0]);
        cross * orientation > 0.0
    })
}

/// Distance from `y` to the sphere of radius `radius` about the origin.
fn sphere_distance(y: &[f64], radius: f64) -> f64 {
    (norm(y) - radius).abs()
}

impl KGeometry {
    /// A regular polygon with `sides` vertices on the circle of radius
    /// `radius` in the plane of the first two coordinates of `R^dim`.
    pub fn inscribed_polygon(dim: usize, sides: usize, radius: f64) -> Self {
        let faces = (0..sides)
            .map(|i| {
                let vertex = |j: usize| {
                    let angle = 2.0 * std::f64::consts::PI * j as f64 / sides as f64;
                    let mut v = vec![0.0; dim];
                    v[0] = radius * angle.cos();
                    v[1] = radius * angle.sin();
                    v
                };
                Segment {
                    a: vertex(i),
                    b: vertex(i + 1),
                }
            })
            .collect();
        KGeometry::PolytopeInCanal { dim, radius, faces }
    }

    pub fn dim(&self) -> usize {
        match self {
            KGeometry::Point { dim, .. }
            | KGeometry::AffinePlane { dim, .. }
            | KGeometry::PolytopeInCanal { dim, .. }
            | KGeometry::CanalSection { dim, .. } => *dim,
            KGeometry::ConvexBoundary { shape } => match shape {
                ConvexShape::Ball { center, .. } => center.len(),
                ConvexShape::Polygon { .. } => 2,
            },
        }
    }

    /// The codimension `k` of `K`.
    pub fn codim(&self) -> usize {
        match self {
            KGeometry::Point { dim, .. } => *dim,
            KGeometry::AffinePlane { codim, .. } | KGeometry::CanalSection { codim, .. } => *codim,
            KGeometry::ConvexBoundary { .. } => 1,
            KGeometry::PolytopeInCanal { dim, .. } => dim - 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.dim();
        if n == 0 {
            return domain("ambient dimension must be positive");
        }
        match self {
            KGeometry::Point { center, .. } => {
                if let Some(c) = center {
                    if c.len() != n {
                        return domain("point center has the wrong dimension");
                    }
                }
            }
            KGeometry::AffinePlane { codim, .. } => {
                if *codim == 0 || *codim >= n {
                    return domain(format!(
                        "affine K needs 1 <= k <= N-1, got k = {codim}, N = {n}"
                    ));
                }
            }
            KGeometry::ConvexBoundary { shape } => match shape {
                ConvexShape::Ball { radius, .. } => {
                    if !(*radius > 0.0) {
                        return domain("ball radius must be positive");
                    }
                }
                ConvexShape::Polygon { vertices } => {
                    polygon_orientation(vertices)?;
                }
            },
            KGeometry::PolytopeInCanal { radius, faces, .. } => {
                if n < 3 {
                    return domain("a polytope of segments needs N >= 3 to have k = N - 1 >= 2");
                }
                if faces.is_empty() || !(*radius > 0.0) {
                    return domain("polytope needs faces and a positive canal radius");
                }
                for f in faces {
                    if f.a.len() != n || f.b.len() != n || norm(&sub(&f.a, &f.b)) == 0.0 {
                        return domain("polytope faces must be non-degenerate segments in R^N");
                    }
                    let lift = |v: &[f64]| norm(&v[..2]);
                    if (lift(&f.a) - radius).abs() > 1e-9 || (lift(&f.b) - radius).abs() > 1e-9 {
                        return domain(
                            "polytope vertices must lie on the canal boundary |y| = radius",
                        );
                    }
                    if f.a[2..].iter().chain(&f.b[2..]).any(|&c| c != 0.0) {
                        return domain(
                            "polytope must lie in the plane E of the first two coordinates",
                        );
                    }
                }
            }
            KGeometry::CanalSection { codim, radius, .. } => {
                if *codim == 0 || *codim > n || !(*radius > 0.0) {
                    return domain("canal needs 1 <= k <= N and a positive section radius");
                }
            }
        }
        Ok(())
    }

    fn nearest(&self, x: &[f64]) -> Nearest {
        match self {
            KGeometry::Point { center, .. } => {
                let diff = match center {
                    Some(c) => sub(x, c),
                    None => x.to_vec(),
                };
                let d = norm(&diff);
                simple(d, diff.iter().map(|v| v / d).collect())
            }
            KGeometry::AffinePlane { dim, codim } => {
                let m = dim - codim;
                let d = norm(&x[m..]);
                let mut grad = vec![0.0; *dim];
                for i in m..*dim {
                    grad[i] = x[i] / d;
                }
                simple(d, grad)
            }
            KGeometry::ConvexBoundary { shape } => match shape {
                ConvexShape::Ball { center, radius } => {
                    let diff = sub(x, center);
                    let r = norm(&diff);
                    let s = (r - radius).signum();
                    let mut out =
                        simple((r - radius).abs(), diff.iter().map(|v| s * v / r).collect());
                    out.gap = if r < RIDGE_GAP { 0.0 } else { f64::INFINITY };
                    out
                }
                ConvexShape::Polygon { vertices } => faceted(x, &polygon_faces(vertices)),
            },
            KGeometry::PolytopeInCanal { faces, .. } => faceted(x, faces),
            KGeometry::CanalSection {
                dim, codim, radius, ..
            } => {
                let m = dim - codim + 1;
                let (y, z) = x.split_at(m);
                let ry = norm(y);
                let dt = sphere_distance(y, *radius);
                let s = (ry - radius).signum();
                let d = (dt * dt + z.iter().map(|v| v * v).sum::<f64>()).sqrt();
                let mut grad = Vec::with_capacity(*dim);
                grad.extend(y.iter().map(|v| s * dt * v / (ry * d)));
                grad.extend(z.iter().map(|v| v / d));
                let mut out = simple(d, grad);
                out.gap = if ry < RIDGE_GAP { 0.0 } else { f64::INFINITY };
                out
            }
        }
    }

    /// The distance alone.
    pub fn distance(&self, x: &[f64]) -> f64 {
        self.nearest(x).d
    }

    /// Distance, gradient and finite-difference Laplacian at `x`.
    pub fn distance_eval(&self, x: &[f64]) -> Result<DistanceSample> {
        if x.len() != self.dim() {
            return domain(format!(
                "point has dimension {}, geometry has N = {}",
                x.len(),
                self.dim()
            ));
        }
        let centre = self.nearest(x);
        if !(centre.d > SINGULAR_DISTANCE) {
            return Err(HardyError::Singular(format!(
                "point lies on K (d = {:e})",
                centre.d
            )));
        }
        let h = (1e-3 * centre.d).max(1e-5);
        let mut laplacian = 0.0;
        let mut crosses = false;
        let mut probe = x.to_vec();
        for i in 0..x.len() {
            let mut at = |offset: f64| {
                probe[i] = x[i] + offset;
                let n = self.nearest(&probe);
                probe[i] = x[i];
                if n.face != centre.face {
                    crosses = true;
                }
                n.d
            };
            let (f2, f1, fm1, fm2) = (at(2.0 * h), at(h), at(-h), at(-2.0 * h));
            laplacian += (-f2 + 16.0 * f1 - 30.0 * centre.d + 16.0 * fm1 - fm2) / (12.0 * h * h);
        }
        Ok(DistanceSample {
            x: x.to_vec(),
            d: centre.d,
            grad_d: centre.grad,
            laplacian_d: laplacian,
            on_ridge: centre.gap < RIDGE_GAP || crosses,
            interior_projection: centre.interior,
        })
    }

    /// For canal geometries, `d̃ Δ_y d̃` with `d̃(y) = dist((y, 0), K)`,
    /// computed by differences in `y` only.
    pub fn canal_section_term(&self, x: &[f64]) -> Result<f64> {
        let KGeometry::CanalSection {
            dim, codim, radius, ..
        } = self
        else {
            return domain("the section term is defined for canal geometries only");
        };
        let m = dim - codim + 1;
        let y = &x[..m];
        let dt = sphere_distance(y, *radius);
        let h = (1e-3 * dt).max(1e-5);
        let mut probe = y.to_vec();
        let mut lap = 0.0;
        for i in 0..m {
            let mut at = |offset: f64| {
                probe[i] = y[i] + offset;
                let v = sphere_distance(&probe, *radius);
                probe[i] = y[i];
                v
            };
            let (f2, f1, fm1, fm2) = (at(2.0 * h), at(h), at(-h), at(-2.0 * h));
            lap += (-f2 + 16.0 * f1 - 30.0 * dt + 16.0 * fm1 - fm2) / (12.0 * h * h);
        }
        Ok(dt * lap)
    }
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn simple(d: f64, grad: Vec<f64>) -> Nearest {
    Nearest {
        d,
        grad,
        face: None,
        gap: f64::INFINITY,
        interior: None,
    }
}

/// Which sign condition is being checked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionKind {
    /// `(p - k)(d Δd + 1 - k) <= 0`.
    C,
    /// `d Δd + 1 - k >= 0`, used when `p = k`.
    CPrime,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Satisfied,
    Violated,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Satisfied => "satisfied",
            Verdict::Violated => "violated",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionSample {
    pub x: Vec<f64>,
    pub d: f64,
    /// `d Δd + 1 - k`.
    pub defect: f64,
    /// The signed quantity that must be `<= 0`.
    pub value: f64,
    pub on_ridge: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionCReport {
    pub params: HardyParams,
    pub kind: ConditionKind,
    pub samples: Vec<ConditionSample>,
    pub verdict: Verdict,
    /// Largest signed value over the samples off the ridges.
    pub worst_value: f64,
    /// Largest `|d Δd + 1 - k|` over the samples off the ridges.
    pub max_abs_defect: f64,
    pub ridge_fraction: f64,
    pub tolerance_slack: f64,
    /// Fraction of samples whose nearest point is interior to a face.
    pub interior_fraction: Option<f64>,
    pub caveats: Vec<String>,
}

/// Samples the condition at `points`.
pub fn check_condition_c(
    geom: &KGeometry,
    params: &HardyParams,
    points: &[Vec<f64>],
) -> Result<ConditionCReport> {
    geom.validate()?;
    params.validate()?;
    if points.is_empty() {
        return domain("condition (C) needs at least one sample point");
    }
    if params.k != geom.codim() || params.n != geom.dim() {
        return parameter(format!(
            "parameters (k = {}, N = {}) do not match the geometry (k = {}, N = {})",
            params.k,
            params.n,
            geom.codim(),
            geom.dim()
        ));
    }
    let kind = if params.is_degenerate() {
        ConditionKind::CPrime
    } else {
        ConditionKind::C
    };
    let evaluated: Vec<DistanceSample> = points
        .par_iter()
        .map(|x| geom.distance_eval(x))
        .collect::<Result<_>>()?;
    let kf = params.kf();
    let samples: Vec<ConditionSample> = evaluated
        .iter()
        .map(|s| {
            let defect = s.d * s.laplacian_d + 1.0 - kf;
            let value = match kind {
                ConditionKind::C => (params.p - kf) * defect,
                ConditionKind::CPrime => -defect,
            };
            ConditionSample {
                x: s.x.clone(),
                d: s.d,
                defect,
                value,
                on_ridge: s.on_ridge,
            }
        })
        .collect();
    let ridge = samples.iter().filter(|s| s.on_ridge).count();
    let ridge_fraction = ridge as f64 / samples.len() as f64;
    let smooth = samples.iter().filter(|s| !s.on_ridge);
    let worst_value = smooth
        .clone()
        .map(|s| s.value)
        .fold(f64::NEG_INFINITY, f64::max);
    let max_abs_defect = smooth.map(|s| s.defect.abs()).fold(0.0, f64::max);
    let verdict = if ridge_fraction > 0.5 {
        Verdict::Inconclusive
    } else if worst_value > TOLERANCE_SLACK {
        Verdict::Violated
    } else {
        Verdict::Satisfied
    };
    let interior: Vec<bool> = evaluated
        .iter()
        .filter_map(|s| s.interior_projection)
        .collect();
    let interior_fraction = (!interior.is_empty())
        .then(|| interior.iter().filter(|&&b| b).count() as f64 / interior.len() as f64);
    let mut caveats = Vec::new();
    if ridge > 0 {
        caveats.push(format!(
            "{ridge} sample(s) on or next to a ridge were excluded from the verdict"
        ));
    }
    if let KGeometry::PolytopeInCanal { .. } = geom {
        caveats.push(format!(
            "face-interior realization of the distance observed at {:.1}% of samples; it is sampled, not certified for all of the domain",
            100.0 * interior_fraction.unwrap_or(0.0)
        ));
    }
    Ok(ConditionCReport {
        params: *params,
        kind,
        samples,
        verdict,
        worst_value,
        max_abs_defect,
        ridge_fraction,
        tolerance_slack: TOLERANCE_SLACK,
        interior_fraction,
        caveats,
    })
}

/// Where and how many points to draw around `K`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerSpec {
    pub count: usize,
    pub seed: u64,
    /// Accepted distances to `K`.
    pub d_min: f64,
    pub d_max: f64,
    /// Half-width of the box along directions parallel to `K` (slabs and
    /// canals), and radial thickness of the outer canal.
    pub extent: f64,
}

impl Default for SamplerSpec {
    fn default() -> Self {
        Self {
            count: 200,
            seed: 0,
            d_min: 0.01,
            d_max: 10.0,
            extent: 1.0,
        }
    }
}

fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

fn unit_vector(rng: &mut ChaCha8Rng, m: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..m).map(|_| standard_normal(rng)).collect();
        let n = norm(&v);
        if n > 1e-12 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

fn in_ball(rng: &mut ChaCha8Rng, m: usize, radius: f64) -> Vec<f64> {
    let r = radius * rng.gen::<f64>().powf(1.0 / m as f64);
    unit_vector(rng, m).into_iter().map(|x| r * x).collect()
}

type Draw = dyn FnMut(&mut ChaCha8Rng) -> Vec<f64>;

/// Random points of `Ω \ K` for the given geometry: an annulus about a
/// point, a slab about an affine set, the interior of a convex body, or the
/// inner/outer canal.
pub fn sample_domain(geom: &KGeometry, spec: &SamplerSpec) -> Result<Vec<Vec<f64>>> {
    geom.validate()?;
    if !(spec.d_min > 0.0 && spec.d_max > spec.d_min) {
        return domain(format!(
            "sampler needs 0 < d_min < d_max, got [{}, {}]",
            spec.d_min, spec.d_max
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = geom.dim();
    let mut draw: Box<Draw> = match geom {
        KGeometry::Point { center, .. } => {
            let c = center.clone().unwrap_or_else(|| vec![0.0; n]);
            let (lo, hi) = (spec.d_min, spec.d_max);
            Box::new(move |rng| {
                let r = rng.gen_range(lo..hi);
                unit_vector(rng, n)
                    .iter()
                    .zip(&c)
                    .map(|(u, c)| c + r * u)
                    .collect()
            })
        }
        KGeometry::AffinePlane { codim, .. } => {
            let (lo, hi, ext, k) = (spec.d_min, spec.d_max, spec.extent, *codim);
            Box::new(move |rng| {
                let mut x: Vec<f64> = (0..n - k).map(|_| rng.gen_range(-ext..=ext)).collect();
                let r = rng.gen_range(lo..hi);
                x.extend(unit_vector(rng, k).into_iter().map(|u| r * u));
                x
            })
        }
        KGeometry::ConvexBoundary { shape } => match shape.clone() {
            ConvexShape::Ball { center, radius } => Box::new(move |rng| {
                in_ball(rng, n, radius)
                    .iter()
                    .zip(&center)
                    .map(|(u, c)| c + u)
                    .collect()
            }),
            ConvexShape::Polygon { vertices } => {
                let orientation = polygon_orientation(&vertices)?;
                let lo =
                    [0, 1].map(|j| vertices.iter().map(|v| v[j]).fold(f64::INFINITY, f64::min));
                let hi = [0, 1].map(|j| {
                    vertices
                        .iter()
                        .map(|v| v[j])
                        .fold(f64::NEG_INFINITY, f64::max)
                });
                Box::new(move |rng| loop {
                    let x = vec![rng.gen_range(lo[0]..hi[0]), rng.gen_range(lo[1]..hi[1])];
                    if polygon_contains(&vertices, orientation, &x) {
                        return x;
                    }
                })
            }
        },
        KGeometry::PolytopeInCanal { radius, .. } => {
            let (radius, ext) = (*radius, spec.extent);
            Box::new(move |rng| {
                let mut x = in_ball(rng, 2, radius);
                x.extend((2..n).map(|_| rng.gen_range(-ext..=ext)));
                x
            })
        }
        KGeometry::CanalSection {
            codim,
            radius,
            side,
            ..
        } => {
            let m = n - codim + 1;
            let (radius, ext, side) = (*radius, spec.extent, *side);
            Box::new(move |rng| {
                let mut y = match side {
                    CanalSide::Inner => in_ball(rng, m, radius),
                    CanalSide::Outer => {
                        let r = rng.gen_range(radius..radius + ext);
                        unit_vector(rng, m).into_iter().map(|u| r * u).collect()
                    }
                };
                y.extend((m..n).map(|_| rng.gen_range(-ext..=ext)));
                y
            })
        }
    };
    let mut points = Vec::with_capacity(spec.count);
    let budget = spec.count.saturating_mul(10_000).max(10_000);
    let mut tries = 0;
    while points.len() < spec.count {
        tries += 1;
        if tries > budget {
            return domain(format!(
                "rejection sampler found only {} of {} points with d in [{}, {}]",
                points.len(),
                spec.count,
                spec.d_min,
                spec.d_max
            ));
        }
        let x = draw(&mut rng);
        let d = geom.distance(&x);
        if d >= spec.d_min && d <= spec.d_max {
            points.push(x);
        }
    }
    Ok(points)
}
