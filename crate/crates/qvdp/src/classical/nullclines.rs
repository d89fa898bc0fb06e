//! Nullcline extraction on the (R, phi) rectangle by marching squares.

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::params::SystemParams;

use super::{phase_plane_distance, rhs, PhasePoint};

/// Line segment in the (R, phi) plane.
pub type Segment = [(f64, f64); 2];

/// Rectangular evaluation grid; `phi` spans a full period including both
/// endpoints so contours crossing the seam are closed.
#[derive(Debug, Clone)]
pub struct PhaseGrid {
    pub r: Vec<f64>,
    pub phi: Vec<f64>,
}

impl PhaseGrid {
    pub fn new(r_lo: f64, r_hi: f64, nr: usize, nphi: usize) -> Result<Self> {
        if r_lo.is_nan() || r_hi.is_nan() || r_lo <= 0.0 || r_hi <= r_lo {
            return Err(Error::InvalidParams("grid needs 0 < r_lo < r_hi".into()));
        }
        if nr < 128 || nphi < 128 {
            return Err(Error::Precondition(format!(
                "nullcline grid resolution must be >= 128 per axis, got {nr} x {nphi}"
            )));
        }
        let r = (0..nr)
            .map(|i| r_lo + (r_hi - r_lo) * i as f64 / (nr - 1) as f64)
            .collect();
        let phi = (0..nphi)
            .map(|j| TAU * j as f64 / (nphi - 1) as f64)
            .collect();
        Ok(Self { r, phi })
    }

    /// Default grid: amplitudes up to `3 R0 + 3`, 256 points per axis.
    pub fn default_for(params: &SystemParams) -> Self {
        let r_hi = 3.0 * params.limit_cycle_radius() + 3.0;
        Self::new(1e-3, r_hi, 256, 256).expect("valid default grid")
    }

    pub fn cell_diagonal(&self) -> f64 {
        let dr = self.r[1] - self.r[0];
        let dphi = self.phi[1] - self.phi[0];
        (dr * dr + dphi * dphi).sqrt()
    }
}

/// The R- and phi-nullclines as segment sets.
#[derive(Debug, Clone)]
pub struct Nullclines {
    pub r_nullcline: Vec<Segment>,
    pub phi_nullcline: Vec<Segment>,
    pub grid: PhaseGrid,
}

/// Zero-level contours of `R'` and `phi'` over the grid.
pub fn nullclines(params: &SystemParams, grid: &PhaseGrid) -> Result<Nullclines> {
    let nr = grid.r.len();
    let nphi = grid.phi.len();
    let mut f_r = vec![vec![0.0; nphi]; nr];
    let mut f_phi = vec![vec![0.0; nphi]; nr];
    for (i, &r) in grid.r.iter().enumerate() {
        for (j, &phi) in grid.phi.iter().enumerate() {
            let (r_dot, phi_dot) = rhs(PhasePoint { r, phi }, params)?;
            f_r[i][j] = r_dot;
            f_phi[i][j] = phi_dot;
        }
    }
    Ok(Nullclines {
        r_nullcline: marching_squares(&grid.r, &grid.phi, &f_r),
        phi_nullcline: marching_squares(&grid.r, &grid.phi, &f_phi),
        grid: grid.clone(),
    })
}

/// Standard marching squares with linear edge interpolation; ambiguous saddle
/// cells are disambiguated by the cell-center average.
fn marching_squares(xs: &[f64], ys: &[f64], field: &[Vec<f64>]) -> Vec<Segment> {
    let mut segments = Vec::new();
    for i in 0..xs.len() - 1 {
        for j in 0..ys.len() - 1 {
            let v00 = field[i][j];
            let v10 = field[i + 1][j];
            let v11 = field[i + 1][j + 1];
            let v01 = field[i][j + 1];
            let idx = (usize::from(v00 > 0.0))
                | (usize::from(v10 > 0.0) << 1)
                | (usize::from(v11 > 0.0) << 2)
                | (usize::from(v01 > 0.0) << 3);
            if idx == 0 || idx == 15 {
                continue;
            }
            let x0 = xs[i];
            let x1 = xs[i + 1];
            let y0 = ys[j];
            let y1 = ys[j + 1];
            // edge zero crossings, each as Option<(x, y)>
            let bottom = cross(v00, v10).map(|t| (x0 + t * (x1 - x0), y0));
            let right = cross(v10, v11).map(|t| (x1, y0 + t * (y1 - y0)));
            let top = cross(v01, v11).map(|t| (x0 + t * (x1 - x0), y1));
            let left = cross(v00, v01).map(|t| (x0, y0 + t * (y1 - y0)));

            match idx {
                1 | 14 => push(&mut segments, bottom, left),
                2 | 13 => push(&mut segments, bottom, right),
                3 | 12 => push(&mut segments, left, right),
                4 | 11 => push(&mut segments, top, right),
                6 | 9 => push(&mut segments, bottom, top),
                7 | 8 => push(&mut segments, left, top),
                5 | 10 => {
                    // saddle: split by the center sign
                    let center = 0.25 * (v00 + v10 + v11 + v01);
                    let center_pos = center > 0.0;
                    let corner_pos = idx == 5; // v00 and v11 positive
                    if center_pos == corner_pos {
                        push(&mut segments, left, bottom);
                        push(&mut segments, top, right);
                    } else {
                        push(&mut segments, left, top);
                        push(&mut segments, bottom, right);
                    }
                }
                _ => unreachable!(),
            }
        }
    }
    segments
}

fn cross(a: f64, b: f64) -> Option<f64> {
    if (a > 0.0) == (b > 0.0) {
        return None;
    }
    Some(a / (a - b))
}

fn push(segments: &mut Vec<Segment>, a: Option<(f64, f64)>, b: Option<(f64, f64)>) {
    if let (Some(p), Some(q)) = (a, b) {
        segments.push([p, q]);
    }
}

/// Intersection points between two segment sets, clustered within `radius`
/// (cylinder metric in phi).
pub fn intersections(a: &[Segment], b: &[Segment], radius: f64) -> Vec<(f64, f64)> {
    let mut points: Vec<(f64, f64)> = Vec::new();
    for s in a {
        for t in b {
            if let Some(p) = segment_intersection(s, t) {
                points.push(p);
            }
        }
    }
    let mut clusters: Vec<(f64, f64)> = Vec::new();
    points.sort_by(|p, q| p.partial_cmp(q).unwrap_or(std::cmp::Ordering::Equal));
    for p in points {
        let pp = PhasePoint {
            r: p.0,
            phi: crate::params::wrap_angle(p.1),
        };
        if !clusters.iter().any(|c| {
            phase_plane_distance(
                PhasePoint {
                    r: c.0,
                    phi: crate::params::wrap_angle(c.1),
                },
                pp,
            ) < radius
        }) {
            clusters.push(p);
        }
    }
    clusters
}

fn segment_intersection(s: &Segment, t: &Segment) -> Option<(f64, f64)> {
    let (p, r) = (s[0], (s[1].0 - s[0].0, s[1].1 - s[0].1));
    let (q, u) = (t[0], (t[1].0 - t[0].0, t[1].1 - t[0].1));
    let denom = r.0 * u.1 - r.1 * u.0;
    if denom.abs() < 1e-300 {
        return None;
    }
    let dq = (q.0 - p.0, q.1 - p.1);
    let tt = (dq.0 * u.1 - dq.1 * u.0) / denom;
    let uu = (dq.0 * r.1 - dq.1 * r.0) / denom;
    if (-1e-12..=1.0 + 1e-12).contains(&tt) && (-1e-12..=1.0 + 1e-12).contains(&uu) {
        Some((p.0 + tt * r.0, p.1 + tt * r.1))
    } else {
        None
    }
}

/// Minimum distance from a point to any segment of a set (for "fixed points
/// lie on both curves" checks).
pub fn distance_to_curve(point: PhasePoint, segments: &[Segment]) -> f64 {
    let mut best = f64::MAX;
    for s in segments {
        best = best.min(point_segment_distance((point.r, point.phi), s));
    }
    best
}

fn point_segment_distance(p: (f64, f64), s: &Segment) -> f64 {
    let (a, b) = (s[0], s[1]);
    let ab = (b.0 - a.0, b.1 - a.1);
    let ap = (p.0 - a.0, p.1 - a.1);
    let len2 = ab.0 * ab.0 + ab.1 * ab.1;
    let t = if len2 > 0.0 {
        ((ap.0 * ab.0 + ap.1 * ab.1) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let c = (a.0 + t * ab.0, a.1 + t * ab.1);
    ((p.0 - c.0).powi(2) + (p.1 - c.1).powi(2)).sqrt()
}

/// Convert (R, phi) segments to Cartesian `(x, y) = (R cos phi, R sin phi)`.
pub fn to_cartesian(segments: &[Segment]) -> Vec<Segment> {
    segments
        .iter()
        .map(|s| {
            [
                (s[0].0 * s[0].1.cos(), s[0].0 * s[0].1.sin()),
                (s[1].0 * s[1].1.cos(), s[1].0 * s[1].1.sin()),
            ]
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::{fixed_points, FixedPointSearch};
    use std::f64::consts::PI;

    fn params(delta: f64, force: f64, eta: f64, theta: f64, gamma2: f64) -> SystemParams {
        SystemParams::new(delta, force, eta, theta, 1.0, gamma2).unwrap()
    }

    #[test]
    fn undriven_r_nullcline_contains_limit_cycle() {
        let p = params(0.5, 0.0, 0.0, 0.0, 3.0);
        let grid = PhaseGrid::new(1e-3, 1.5, 192, 192).unwrap();
        let nc = nullclines(&p, &grid).unwrap();
        // the R-nullcline contains the line R = R0 across all phases
        let r0 = p.limit_cycle_radius();
        for phi in [0.5, 2.0, 4.0, 6.0] {
            let d = distance_to_curve(PhasePoint { r: r0, phi }, &nc.r_nullcline);
            assert!(
                d < 1.5 * grid.cell_diagonal(),
                "R0 line missing at phi = {phi}: {d}"
            );
        }
        // no phi-nullcline when phi' = -Delta != 0 everywhere
        assert!(nc.phi_nullcline.is_empty());
    }

    #[test]
    fn grid_resolution_is_enforced() {
        assert!(PhaseGrid::new(1e-3, 2.0, 100, 256).is_err());
    }

    #[test]
    fn intersections_match_fixed_points_fig1_style() {
        for (eta, expected) in [(1.0, 1usize), (1.5, 3usize)] {
            let p = params(1.0, 1.0, eta, PI / 4.0, 3.0);
            let grid = PhaseGrid::default_for(&p);
            let nc = nullclines(&p, &grid).unwrap();
            let pts = intersections(
                &nc.r_nullcline,
                &nc.phi_nullcline,
                2.0 * grid.cell_diagonal(),
            );
            let fps = fixed_points(&p, &FixedPointSearch::default()).unwrap();
            assert_eq!(pts.len(), expected, "eta = {eta}: {pts:?}");
            assert_eq!(fps.len(), expected);
            // fixed points lie on both curves within grid tolerance
            for fp in &fps {
                assert!(distance_to_curve(fp.point, &nc.r_nullcline) < grid.cell_diagonal());
                assert!(distance_to_curve(fp.point, &nc.phi_nullcline) < grid.cell_diagonal());
            }
        }
    }

    #[test]
    fn cartesian_export_is_polar_transform() {
        let segs = vec![[(1.0, 0.0), (2.0, PI / 2.0)]];
        let cart = to_cartesian(&segs);
        assert!((cart[0][0].0 - 1.0).abs() < 1e-15);
        assert!(cart[0][0].1.abs() < 1e-15);
        assert!(cart[0][1].0.abs() < 1e-12);
        assert!((cart[0][1].1 - 2.0).abs() < 1e-12);
    }
}
