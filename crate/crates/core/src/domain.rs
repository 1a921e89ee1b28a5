//! Convex domains: signed distance, boundary projection, and rasterization
//! onto a uniform grid with Shortley–Weller arm lengths.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DomainSpec {
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    /// Axis-aligned ellipse centred at the origin, `x²/a² + y²/b² < 1`.
    Ellipse {
        a: f64,
        b: f64,
    },
    /// Counterclockwise vertex list.
    Polygon {
        vertices: Vec<[f64; 2]>,
    },
}

const NEWTON_TOL: f64 = 1e-12;

impl DomainSpec {
    pub fn disk(radius: f64) -> Self {
        DomainSpec::Ball {
            center: vec![0.0, 0.0],
            radius,
        }
    }

    pub fn ball(dim: usize, radius: f64) -> Self {
        DomainSpec::Ball {
            center: vec![0.0; dim],
            radius,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            DomainSpec::Ball { center, .. } => center.len(),
            _ => 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            DomainSpec::Ball { center, radius } => {
                if !(2..=3).contains(&center.len()) {
                    return Err(Error::input("balls are supported in 2 or 3 dimensions"));
                }
                if !(*radius > 0.0 && radius.is_finite()) {
                    return Err(Error::input("ball radius must be positive"));
                }
            }
            DomainSpec::Ellipse { a, b } => {
                if !(*a > 0.0 && *b > 0.0 && a.is_finite() && b.is_finite()) {
                    return Err(Error::input("ellipse semi-axes must be positive"));
                }
            }
            DomainSpec::Polygon { vertices } => {
                if vertices.len() < 3 {
                    return Err(Error::input("polygon needs at least three vertices"));
                }
                if !polygon_strictly_convex_ccw(vertices) {
                    return Err(Error::input(
                        "polygon vertices are not strictly convex and counterclockwise",
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn centroid(&self) -> Vec<f64> {
        match self {
            DomainSpec::Ball { center, .. } => center.clone(),
            DomainSpec::Ellipse { .. } => vec![0.0, 0.0],
            DomainSpec::Polygon { vertices } => {
                let n = vertices.len() as f64;
                vec![
                    vertices.iter().map(|v| v[0]).sum::<f64>() / n,
                    vertices.iter().map(|v| v[1]).sum::<f64>() / n,
                ]
            }
        }
    }

    /// Smallest width (distance between parallel supporting lines).
    pub fn min_width(&self) -> f64 {
        match self {
            DomainSpec::Ball { radius, .. } => 2.0 * radius,
            DomainSpec::Ellipse { a, b } => 2.0 * a.min(*b),
            DomainSpec::Polygon { vertices } => {
                let n = vertices.len();
                (0..n)
                    .map(|i| {
                        let p = vertices[i];
                        let q = vertices[(i + 1) % n];
                        let len = ((q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2)).sqrt();
                        vertices.iter().map(|v| cross(p, q, *v).abs() / len).fold(0.0, f64::max)
                    })
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }

    /// Axis-aligned bounding box `(lo, hi)`.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            DomainSpec::Ball { center, radius } => (
                center.iter().map(|c| c - radius).collect(),
                center.iter().map(|c| c + radius).collect(),
            ),
            DomainSpec::Ellipse { a, b } => (vec![-a, -b], vec![*a, *b]),
            DomainSpec::Polygon { vertices } => {
                let fold = |k: usize, f: fn(f64, f64) -> f64, init: f64| vertices.iter().map(|v| v[k]).fold(init, f);
                (
                    vec![fold(0, f64::min, f64::INFINITY), fold(1, f64::min, f64::INFINITY)],
                    vec![
                        fold(0, f64::max, f64::NEG_INFINITY),
                        fold(1, f64::max, f64::NEG_INFINITY),
                    ],
                )
            }
        }
    }

    /// Closest point of `∂Ω` to `x`.
    pub fn project_to_boundary(&self, x: &[f64]) -> Vec<f64> {
        match self {
            DomainSpec::Ball { center, radius } => {
                let d: Vec<f64> = x.iter().zip(center).map(|(a, c)| a - c).collect();
                let r = d.iter().map(|v| v * v).sum::<f64>().sqrt();
                if r == 0.0 {
                    let mut p = center.clone();
                    p[0] += radius;
                    return p;
                }
                center.iter().zip(&d).map(|(c, di)| c + radius * di / r).collect()
            }
            DomainSpec::Ellipse { a, b } => {
                let (px, py) = ellipse_closest_point(*a, *b, x[0], x[1]);
                vec![px, py]
            }
            DomainSpec::Polygon { vertices } => {
                let n = vertices.len();
                let mut best = (f64::INFINITY, [0.0, 0.0]);
                for i in 0..n {
                    let c = closest_on_segment(vertices[i], vertices[(i + 1) % n], [x[0], x[1]]);
                    let d = (c[0] - x[0]).hypot(c[1] - x[1]);
                    if d < best.0 {
                        best = (d, c);
                    }
                }
                best.1.to_vec()
            }
        }
    }

    fn contains_strict(&self, x: &[f64]) -> bool {
        match self {
            DomainSpec::Ball { center, radius } => {
                x.iter().zip(center).map(|(a, c)| (a - c).powi(2)).sum::<f64>() < radius * radius
            }
            DomainSpec::Ellipse { a, b } => (x[0] / a).powi(2) + (x[1] / b).powi(2) < 1.0,
            DomainSpec::Polygon { vertices } => {
                let n = vertices.len();
                (0..n).all(|i| cross(vertices[i], vertices[(i + 1) % n], [x[0], x[1]]) > 0.0)
            }
        }
    }

    /// Outward unit normal at a boundary point.
    pub fn boundary_normal(&self, p: &[f64]) -> Vec<f64> {
        let raw = match self {
            DomainSpec::Ball { center, .. } => p.iter().zip(center).map(|(a, c)| a - c).collect::<Vec<_>>(),
            DomainSpec::Ellipse { a, b } => vec![p[0] / (a * a), p[1] / (b * b)],
            DomainSpec::Polygon { vertices } => {
                let n = vertices.len();
                let mut acc = [0.0, 0.0];
                let mut best = f64::INFINITY;
                let mut hits = Vec::new();
                for i in 0..n {
                    let (s, e) = (vertices[i], vertices[(i + 1) % n]);
                    let c = closest_on_segment(s, e, [p[0], p[1]]);
                    let d = (c[0] - p[0]).hypot(c[1] - p[1]);
                    if d < best - 1e-12 {
                        best = d;
                        hits.clear();
                    }
                    if d <= best + 1e-12 {
                        hits.push(i);
                    }
                }
                // average of the adjacent edge normals at a vertex
                for i in hits {
                    let (s, e) = (vertices[i], vertices[(i + 1) % n]);
                    let (dx, dy) = (e[0] - s[0], e[1] - s[1]);
                    let len = dx.hypot(dy);
                    acc[0] += dy / len;
                    acc[1] -= dx / len;
                }
                acc.to_vec()
            }
        };
        let len = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
        raw.iter().map(|v| v / len).collect()
    }

    /// Distance `s > 0` at which the ray `x + s·dir` (unit `dir`) leaves
    /// the domain; `x` must be inside.
    pub fn exit_distance(&self, x: &[f64], dir: &[f64]) -> f64 {
        match self {
            DomainSpec::Ball { center, radius } => {
                let d: Vec<f64> = x.iter().zip(center).map(|(a, c)| a - c).collect();
                let b = d.iter().zip(dir).map(|(a, b)| a * b).sum::<f64>();
                let c = d.iter().map(|v| v * v).sum::<f64>() - radius * radius;
                positive_root(1.0, b, c)
            }
            DomainSpec::Ellipse { a, b } => {
                let qa = (dir[0] / a).powi(2) + (dir[1] / b).powi(2);
                let qb = x[0] * dir[0] / (a * a) + x[1] * dir[1] / (b * b);
                let qc = (x[0] / a).powi(2) + (x[1] / b).powi(2) - 1.0;
                positive_root(qa, qb, qc)
            }
            DomainSpec::Polygon { vertices } => {
                let n = vertices.len();
                let mut best = f64::INFINITY;
                for i in 0..n {
                    let (s, e) = (vertices[i], vertices[(i + 1) % n]);
                    // outward normal of a ccw edge
                    let nrm = [e[1] - s[1], -(e[0] - s[0])];
                    let den = nrm[0] * dir[0] + nrm[1] * dir[1];
                    if den > 0.0 {
                        let num = nrm[0] * (s[0] - x[0]) + nrm[1] * (s[1] - x[1]);
                        best = best.min(num / den);
                    }
                }
                best
            }
        }
    }
}

/// Root `s > 0` of `a s² + 2 b s + c = 0` with `c < 0` (point inside).
fn positive_root(a: f64, b: f64, c: f64) -> f64 {
    let disc = (b * b - a * c).max(0.0).sqrt();
    // cancellation-free form of (-b + disc)/a
    if b <= 0.0 {
        (-b + disc) / a
    } else {
        -c / (b + disc)
    }
}

fn cross(p: [f64; 2], q: [f64; 2], x: [f64; 2]) -> f64 {
    (q[0] - p[0]) * (x[1] - p[1]) - (q[1] - p[1]) * (x[0] - p[0])
}

fn closest_on_segment(p: [f64; 2], q: [f64; 2], x: [f64; 2]) -> [f64; 2] {
    let d = [q[0] - p[0], q[1] - p[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    let t = (((x[0] - p[0]) * d[0] + (x[1] - p[1]) * d[1]) / len2).clamp(0.0, 1.0);
    [p[0] + t * d[0], p[1] + t * d[1]]
}

fn polygon_strictly_convex_ccw(v: &[[f64; 2]]) -> bool {
    let n = v.len();
    (0..n).all(|i| {
        let (a, b, c) = (v[i], v[(i + 1) % n], v[(i + 2) % n]);
        cross(a, b, c) > 0.0
    })
}

/// Closest point on the ellipse `x²/a² + y²/b² = 1` to `(x, y)`, by
/// safeguarded Newton on the projection equation
/// `F(s) = (a x/(s + a²))² + (b y/(s + b²))² − 1 = 0` in the first quadrant.
fn ellipse_closest_point(a: f64, b: f64, x: f64, y: f64) -> (f64, f64) {
    if a < b {
        let (py, px) = ellipse_closest_point(b, a, y, x);
        return (px, py);
    }
    let (sx, sy) = (x.signum(), y.signum());
    let (x0, y0) = (x.abs(), y.abs());
    let (px, py) = if y0 > 0.0 {
        if x0 > 0.0 {
            let f = |s: f64| (a * x0 / (s + a * a)).powi(2) + (b * y0 / (s + b * b)).powi(2) - 1.0;
            let df =
                |s: f64| -2.0 * (a * x0).powi(2) / (s + a * a).powi(3) - 2.0 * (b * y0).powi(2) / (s + b * b).powi(3);
            // F is decreasing on (-b², ∞); bracket the root
            let mut lo = -b * b + b * y0;
            let mut hi = -b * b + (a * a * x0 * x0 + b * b * y0 * y0).sqrt();
            let mut s = if f(0.0) > 0.0 {
                hi.min(0.0f64.max(lo))
            } else {
                lo.max(hi.min(0.0))
            };
            for _ in 0..200 {
                let fs = f(s);
                if fs > 0.0 {
                    lo = s;
                } else {
                    hi = s;
                }
                let mut next = s - fs / df(s);
                if !(next > lo && next < hi) {
                    next = 0.5 * (lo + hi);
                }
                if (next - s).abs() <= NEWTON_TOL * (1.0 + s.abs()) {
                    s = next;
                    break;
                }
                s = next;
            }
            (a * a * x0 / (s + a * a), b * b * y0 / (s + b * b))
        } else {
            (0.0, b)
        }
    } else {
        let numer = a * x0;
        let denom = a * a - b * b;
        if numer < denom {
            let xa = numer / denom;
            (a * xa, b * (1.0 - xa * xa).max(0.0).sqrt())
        } else {
            (a, 0.0)
        }
    };
    (sx * px, sy * py)
}

/// Negative inside, positive outside, zero on the boundary.
pub fn signed_distance(spec: &DomainSpec, x: &[f64]) -> f64 {
    match spec {
        DomainSpec::Ball { center, radius } => {
            x.iter().zip(center).map(|(a, c)| (a - c).powi(2)).sum::<f64>().sqrt() - radius
        }
        _ => {
            let p = spec.project_to_boundary(x);
            let d = (p[0] - x[0]).hypot(p[1] - x[1]);
            if spec.contains_strict(x) {
                -d
            } else {
                d
            }
        }
    }
}

pub fn assert_convex(spec: &DomainSpec) -> bool {
    match spec {
        DomainSpec::Ball { .. } | DomainSpec::Ellipse { .. } => true,
        DomainSpec::Polygon { vertices } => vertices.len() >= 3 && polygon_strictly_convex_ccw(vertices),
    }
}

impl fmt::Display for DomainSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DomainSpec::Ball { center, radius } => {
                if center.iter().all(|&c| c == 0.0) {
                    if center.len() == 2 {
                        write!(f, "disk:{radius}")
                    } else {
                        write!(f, "ball{}:{radius}", center.len())
                    }
                } else {
                    let c: Vec<String> = center.iter().map(|c| c.to_string()).collect();
                    write!(f, "ball:{radius}@{}", c.join(","))
                }
            }
            DomainSpec::Ellipse { a, b } => write!(f, "ellipse:{a},{b}"),
            DomainSpec::Polygon { vertices } => {
                let v: Vec<String> = vertices.iter().map(|p| format!("{},{}", p[0], p[1])).collect();
                write!(f, "polygon:{}", v.join(";"))
            }
        }
    }
}

impl FromStr for DomainSpec {
    type Err = Error;

    /// `disk:R`, `ball3:R`, `ball:R@cx,cy[,cz]`, `ellipse:a,b`,
    /// `polygon:x,y;x,y;...`
    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| Error::input(format!("domain '{s}' lacks a ':' separator")))?;
        let num = |t: &str| -> Result<f64> {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::input(format!("bad number '{t}' in domain '{s}'")))
        };
        let list = |t: &str| -> Result<Vec<f64>> { t.split(',').map(num).collect() };
        let spec = match kind.trim() {
            "disk" => DomainSpec::disk(num(rest)?),
            "ball2" => DomainSpec::ball(2, num(rest)?),
            "ball3" => DomainSpec::ball(3, num(rest)?),
            "ball" => match rest.split_once('@') {
                Some((r, c)) => DomainSpec::Ball {
                    center: list(c)?,
                    radius: num(r)?,
                },
                None => DomainSpec::ball(2, num(rest)?),
            },
            "ellipse" => {
                let v = list(rest)?;
                if v.len() != 2 {
                    return Err(Error::input("ellipse needs two semi-axes"));
                }
                DomainSpec::Ellipse { a: v[0], b: v[1] }
            }
            "polygon" => {
                let vertices = rest
                    .split(';')
                    .map(|p| {
                        let v = list(p)?;
                        if v.len() != 2 {
                            return Err(Error::input("polygon vertex needs two coordinates"));
                        }
                        Ok([v[0], v[1]])
                    })
                    .collect::<Result<Vec<_>>>()?;
                DomainSpec::Polygon { vertices }
            }
            other => return Err(Error::input(format!("unknown domain kind '{other}'"))),
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NodeClass {
    Interior,
    BoundaryAdjacent,
    Exterior,
}

/// The eight stencil directions: E, W, N, S, NE, SW, NW, SE.
pub const DIRECTIONS: [(i64, i64); 8] = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (-1, -1), (-1, 1), (1, -1)];

/// Minimum distance to `∂Ω`, in units of `h`, for a node to carry an unknown.
/// Closer nodes are treated as lying on the boundary.
pub const MIN_ARM: f64 = 1e-3;

/// Grid points along an axis where `∂Ω` cuts a stencil arm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCrossing {
    /// Node the arm starts from.
    pub node: usize,
    /// Index into [`DIRECTIONS`] (axis directions only: 0..4).
    pub direction: usize,
    /// Distance from the node to `point`, in units of `h`. Slightly above
    /// one when the neighbour was dropped for hugging the boundary.
    pub theta: f64,
    pub point: Vec<f64>,
    pub normal: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryFoot {
    pub node: usize,
    pub foot: Vec<f64>,
    pub normal: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridMask {
    pub spec: DomainSpec,
    pub origin: [f64; 2],
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
    pub class: Vec<NodeClass>,
    /// Unknown index per node, for interior and boundary-adjacent nodes.
    pub unknown: Vec<Option<usize>>,
    /// Node index per unknown.
    pub nodes: Vec<usize>,
    /// Arm lengths per unknown and direction, in units of the direction's
    /// step (`h` on axes, `h√2` on diagonals). Where the neighbour carries no
    /// unknown the arm ends on `∂Ω` (value zero); arms are capped at one, so a
    /// neighbour lying within [`MIN_ARM`]`·h` of the boundary stands in for it.
    pub arms: Vec<[f64; 8]>,
    pub crossings: Vec<BoundaryCrossing>,
    pub feet: Vec<BoundaryFoot>,
}

impl GridMask {
    pub fn node_index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn node_ij(&self, node: usize) -> (usize, usize) {
        (node % self.nx, node / self.nx)
    }

    pub fn coords(&self, node: usize) -> [f64; 2] {
        let (i, j) = self.node_ij(node);
        [self.origin[0] + i as f64 * self.h, self.origin[1] + j as f64 * self.h]
    }

    pub fn unknowns(&self) -> usize {
        self.nodes.len()
    }

    pub fn count(&self, class: NodeClass) -> usize {
        self.class.iter().filter(|&&c| c == class).count()
    }

    /// Unknown index of the neighbour of unknown `k` in direction `d`, if it
    /// carries one.
    pub fn neighbour(&self, k: usize, d: usize) -> Option<usize> {
        let (i, j) = self.node_ij(self.nodes[k]);
        let (di, dj) = DIRECTIONS[d];
        self.unknown_at(i as i64 + di, j as i64 + dj)
    }

    /// Unknown at grid position `(i, j)`, if any.
    pub fn unknown_at(&self, i: i64, j: i64) -> Option<usize> {
        if i < 0 || j < 0 || i as usize >= self.nx || j as usize >= self.ny {
            return None;
        }
        self.unknown[self.node_index(i as usize, j as usize)]
    }

    /// Unknown sitting at the point `x`, if `x` is a grid node.
    pub fn unknown_near(&self, x: [f64; 2]) -> Option<usize> {
        let fi = (x[0] - self.origin[0]) / self.h;
        let fj = (x[1] - self.origin[1]) / self.h;
        let (i, j) = (fi.round(), fj.round());
        if (fi - i).abs() > 1e-9 || (fj - j).abs() > 1e-9 {
            return None;
        }
        self.unknown_at(i as i64, j as i64)
    }
}

/// Minimum number of grid steps across the smallest width.
pub const MIN_NODES_ACROSS: f64 = 16.0;

pub fn rasterize(spec: &DomainSpec, h: f64) -> Result<GridMask> {
    spec.validate()?;
    if spec.dim() != 2 {
        return Err(Error::Configuration("grids are two-dimensional".into()));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Configuration(format!("grid spacing must be positive, got {h}")));
    }
    let across = spec.min_width() / h;
    if across < MIN_NODES_ACROSS {
        return Err(Error::Configuration(format!(
            "grid too coarse: {across:.1} steps across the smallest width, need {MIN_NODES_ACROSS}"
        )));
    }
    let (lo, hi) = spec.bounding_box();
    let i0 = (lo[0] / h).floor() as i64 - 1;
    let i1 = (hi[0] / h).ceil() as i64 + 1;
    let j0 = (lo[1] / h).floor() as i64 - 1;
    let j1 = (hi[1] / h).ceil() as i64 + 1;
    let nx = (i1 - i0 + 1) as usize;
    let ny = (j1 - j0 + 1) as usize;
    let origin = [i0 as f64 * h, j0 as f64 * h];
    let coord = |i: usize, j: usize| [origin[0] + i as f64 * h, origin[1] + j as f64 * h];

    let mut inside = vec![false; nx * ny];
    for j in 0..ny {
        for i in 0..nx {
            inside[j * nx + i] = signed_distance(spec, &coord(i, j)) < -MIN_ARM * h;
        }
    }
    let mut unknown = vec![None; nx * ny];
    let mut nodes = Vec::new();
    for (idx, &ins) in inside.iter().enumerate() {
        if ins {
            unknown[idx] = Some(nodes.len());
            nodes.push(idx);
        }
    }
    let mut class = vec![NodeClass::Exterior; nx * ny];
    let mut arms = Vec::with_capacity(nodes.len());
    let mut crossings = Vec::new();
    let mut feet = Vec::new();
    for (k, &idx) in nodes.iter().enumerate() {
        let (i, j) = (idx % nx, idx / nx);
        let x = coord(i, j);
        let mut arm = [1.0; 8];
        let mut adjacent = false;
        for (d, &(di, dj)) in DIRECTIONS.iter().enumerate() {
            let (ni, nj) = (i as i64 + di, j as i64 + dj);
            let neighbour_inside = ni >= 0
                && nj >= 0
                && (ni as usize) < nx
                && (nj as usize) < ny
                && inside[nj as usize * nx + ni as usize];
            if neighbour_inside {
                continue;
            }
            adjacent = true;
            let step = ((di * di + dj * dj) as f64).sqrt();
            let dir = [di as f64 / step, dj as f64 / step];
            let s = spec.exit_distance(&x, &dir);
            // the neighbour is outside or too close to ∂Ω, so the exit lies within one step
            arm[d] = (s / (step * h)).min(1.0);
            if d < 4 {
                let theta = s / h;
                let point = vec![x[0] + s * dir[0], x[1] + s * dir[1]];
                let normal = spec.boundary_normal(&point);
                crossings.push(BoundaryCrossing {
                    node: k,
                    direction: d,
                    theta,
                    point,
                    normal,
                });
            }
        }
        class[idx] = if adjacent {
            NodeClass::BoundaryAdjacent
        } else {
            NodeClass::Interior
        };
        if adjacent {
            let foot = spec.project_to_boundary(&x);
            let d = (foot[0] - x[0]).hypot(foot[1] - x[1]);
            let normal = vec![(foot[0] - x[0]) / d, (foot[1] - x[1]) / d];
            feet.push(BoundaryFoot {
                node: idx,
                foot,
                normal,
            });
        }
        arms.push(arm);
    }
    Ok(GridMask {
        spec: spec.clone(),
        origin,
        h,
        nx,
        ny,
        class,
        unknown,
        nodes,
        arms,
        crossings,
        feet,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn square() -> DomainSpec {
        DomainSpec::Polygon {
            vertices: vec![[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]],
        }
    }

    fn l_shape() -> DomainSpec {
        DomainSpec::Polygon {
            vertices: vec![[0.0, 0.0], [2.0, 0.0], [2.0, 1.0], [1.0, 1.0], [1.0, 2.0], [0.0, 2.0]],
        }
    }

    #[test]
    fn signed_distance_examples() {
        let disk = DomainSpec::disk(1.0);
        assert_eq!(signed_distance(&disk, &[0.0, 0.0]), -1.0);
        assert_eq!(signed_distance(&disk, &[2.0, 0.0]), 1.0);
        assert_relative_eq!(signed_distance(&square(), &[0.5, 0.0]), -0.5);
        assert_relative_eq!(signed_distance(&square(), &[2.0, 0.0]), 1.0);
    }

    #[test]
    fn ellipse_distance_against_dense_sampling() {
        // brute-force oracle: minimum over a fine parametrisation of the boundary
        let (a, b) = (2.0, 1.0);
        let spec = DomainSpec::Ellipse { a, b };
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let x = [rng.random_range(-3.0..3.0), rng.random_range(-2.0..2.0)];
            let dist = |t: f64| (a * t.cos() - x[0]).hypot(b * t.sin() - x[1]);
            let dt = std::f64::consts::TAU / 20_000.0;
            let k = (0..20_000)
                .min_by(|&i, &j| dist(i as f64 * dt).total_cmp(&dist(j as f64 * dt)))
                .unwrap();
            // polish the best sample by ternary search
            let (mut lo, mut hi) = ((k as f64 - 1.0) * dt, (k as f64 + 1.0) * dt);
            for _ in 0..200 {
                let (m1, m2) = (lo + (hi - lo) / 3.0, hi - (hi - lo) / 3.0);
                if dist(m1) < dist(m2) {
                    hi = m2;
                } else {
                    lo = m1;
                }
            }
            let brute = dist(0.5 * (lo + hi));
            let d = signed_distance(&spec, &x);
            assert!((d.abs() - brute).abs() < 1e-9, "{x:?}: {d} vs {brute}");
        }
        assert_relative_eq!(signed_distance(&spec, &[0.0, 0.0]), -1.0);
        let expect = ((2.0f64 / 3.0 - 0.5).powi(2) + 8.0 / 9.0).sqrt();
        assert_relative_eq!(signed_distance(&spec, &[0.5, 0.0]), -expect, max_relative = 1e-14);
    }

    #[test]
    fn signed_distance_is_lipschitz() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for spec in [
            DomainSpec::disk(1.0),
            DomainSpec::Ellipse { a: 2.0, b: 1.0 },
            DomainSpec::Ellipse { a: 0.7, b: 1.6 },
            square(),
        ] {
            for _ in 0..2000 {
                let x = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
                let y = [x[0] + rng.random_range(-0.2..0.2), x[1] + rng.random_range(-0.2..0.2)];
                let lhs = (signed_distance(&spec, &x) - signed_distance(&spec, &y)).abs();
                assert!(lhs <= (x[0] - y[0]).hypot(x[1] - y[1]) + 1e-10);
            }
        }
    }

    #[test]
    fn coarse_grid_is_rejected() {
        assert!(matches!(
            rasterize(&DomainSpec::disk(1.0), 0.5),
            Err(Error::Configuration(_))
        ));
    }

    #[test]
    fn interior_count_scales_with_area() {
        let c1 = rasterize(&DomainSpec::disk(1.0), 1.0 / 16.0).unwrap();
        let c2 = rasterize(&DomainSpec::disk(1.0), 1.0 / 32.0).unwrap();
        let (n1, n2) = (c1.unknowns() as f64, c2.unknowns() as f64);
        assert!((n2 / n1 - 4.0).abs() <= 0.4, "{n1} {n2}");
    }

    #[test]
    fn classification_invariants() {
        for spec in [
            DomainSpec::disk(1.0),
            DomainSpec::Ellipse { a: 2.0, b: 1.0 },
            square(),
            DomainSpec::Polygon {
                vertices: vec![[0.0, 0.0], [2.0, 0.2], [1.2, 1.5]],
            },
        ] {
            let h = spec.min_width() / 40.0;
            let g = rasterize(&spec, h).unwrap();
            for (idx, c) in g.class.iter().enumerate() {
                let d = signed_distance(&spec, &g.coords(idx));
                match c {
                    NodeClass::Interior => assert!(d < -h / 2.0),
                    NodeClass::BoundaryAdjacent => assert!(d < 0.0),
                    NodeClass::Exterior => {}
                }
            }
            let centroid = spec.centroid();
            for f in &g.feet {
                let n = &f.normal;
                assert!((n[0].hypot(n[1]) - 1.0).abs() <= 1e-12);
                assert!(n[0] * (f.foot[0] - centroid[0]) + n[1] * (f.foot[1] - centroid[1]) > 0.0);
                assert!(signed_distance(&spec, &f.foot).abs() <= 1e-9);
            }
            for c in &g.crossings {
                assert!(c.theta >= MIN_ARM && c.theta <= 1.0 + 1e-2);
                assert!(signed_distance(&spec, &c.point).abs() <= 1e-9);
                assert!((c.normal[0].hypot(c.normal[1]) - 1.0).abs() <= 1e-12);
            }
            let again = rasterize(&spec, h).unwrap();
            assert_eq!(g, again);
        }
    }

    #[test]
    fn convexity_verdicts() {
        assert!(assert_convex(&DomainSpec::ball(3, 2.0)));
        assert!(assert_convex(&DomainSpec::Ellipse { a: 2.0, b: 1.0 }));
        assert!(assert_convex(&square()));
        assert!(!assert_convex(&l_shape()));
        assert!(rasterize(&l_shape(), 0.05).is_err());
    }

    #[test]
    fn parse_and_display() {
        for s in ["disk:1", "ellipse:2,1", "ball3:1.5", "polygon:0,0;1,0;0,1"] {
            let d: DomainSpec = s.parse().unwrap();
            assert_eq!(d.to_string().parse::<DomainSpec>().unwrap(), d);
        }
        assert!("square:1".parse::<DomainSpec>().is_err());
        assert!("polygon:0,0;1,1;1,0".parse::<DomainSpec>().is_err());
    }
}
