//! Iteration counts of the scalar Newton and Newton-Schulz maps over a grid
//! of complex starting points.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// `z <- (z + 1/z)/2`
    Newton,
    /// `z <- (3z - z^3)/2`
    NewtonSchulz,
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "newton" => Ok(Scheme::Newton),
            "ns" | "newton_schulz" | "newton-schulz" => Ok(Scheme::NewtonSchulz),
            _ => Err(Error::Parse(format!("unknown scheme `{s}` (newton | ns)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
}

impl Region {
    pub fn square(half_width: f64) -> Self {
        Region {
            xmin: -half_width,
            xmax: half_width,
            ymin: -half_width,
            ymax: half_width,
        }
    }
}

/// Grid coordinate `k` of `grid` points from `lo` to `hi`. Written so that
/// a range symmetric about zero gives exactly negated mirror coordinates.
pub fn grid_coord(lo: f64, hi: f64, k: usize, grid: usize) -> f64 {
    let m = (grid - 1) as f64;
    (lo * (m - k as f64) + hi * k as f64) / m
}

/// Steps until `|z^2 - 1| < tol`, or `max_iter + 1` if that never happens
/// (including a division by zero or overflow).
pub fn iterations(scheme: Scheme, re: f64, im: f64, tol: f64, max_iter: u32) -> u32 {
    let (mut x, mut y) = (re, im);
    for k in 0..=max_iter {
        let (a, b) = (x * x - y * y - 1.0, 2.0 * x * y);
        if (a * a + b * b).sqrt() < tol {
            return k;
        }
        if k == max_iter || !x.is_finite() || !y.is_finite() {
            break;
        }
        match scheme {
            Scheme::Newton => {
                let d = x * x + y * y;
                if d == 0.0 {
                    break;
                }
                let (ix, iy) = (x / d, -y / d);
                x = (x + ix) / 2.0;
                y = (y + iy) / 2.0;
            }
            Scheme::NewtonSchulz => {
                let (x2, y2) = (x * x - y * y, 2.0 * x * y);
                let (x3, y3) = (x2 * x - y2 * y, x2 * y + y2 * x);
                x = (3.0 * x - x3) / 2.0;
                y = (3.0 * y - y3) / 2.0;
            }
        }
    }
    max_iter + 1
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Raster {
    pub scheme: Scheme,
    pub region: Region,
    pub grid: usize,
    pub tol: f64,
    pub max_iter: u32,
    /// Row-major, row `j` at `y_j` (ascending), column `i` at `x_i`.
    pub counts: Vec<u32>,
}

impl Raster {
    pub fn x(&self, i: usize) -> f64 {
        grid_coord(self.region.xmin, self.region.xmax, i, self.grid)
    }

    pub fn y(&self, j: usize) -> f64 {
        grid_coord(self.region.ymin, self.region.ymax, j, self.grid)
    }

    pub fn count(&self, i: usize, j: usize) -> u32 {
        self.counts[j * self.grid + i]
    }

    pub fn converged(&self, i: usize, j: usize) -> bool {
        self.count(i, j) <= self.max_iter
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("i,j,re,im,iterations\n");
        for j in 0..self.grid {
            for i in 0..self.grid {
                let _ = writeln!(s, "{i},{j},{:e},{:e},{}", self.x(i), self.y(j), self.count(i, j));
            }
        }
        s
    }

    /// Binary PGM, top row at `ymax`; darker is slower, black is
    /// non-convergent.
    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.grid, self.grid).into_bytes();
        let cap = self.max_iter.max(1) as f64;
        for j in (0..self.grid).rev() {
            for i in 0..self.grid {
                let c = self.count(i, j);
                let v = if c > self.max_iter { 0 } else { (255.0 * (1.0 - c as f64 / cap)).round() as u8 };
                out.push(v);
            }
        }
        out
    }
}

pub fn convergence_raster(scheme: Scheme, region: Region, grid: usize, tol: f64, max_iter: u32) -> Result<Raster> {
    if grid < 2 {
        return Err(Error::Domain("raster grid must be at least 2".into()));
    }
    if !(region.xmin < region.xmax && region.ymin < region.ymax) {
        return Err(Error::Domain("empty raster region".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::Domain("tolerance must be positive".into()));
    }
    let mut counts = Vec::with_capacity(grid * grid);
    for j in 0..grid {
        let y = grid_coord(region.ymin, region.ymax, j, grid);
        for i in 0..grid {
            let x = grid_coord(region.xmin, region.xmax, i, grid);
            counts.push(iterations(scheme, x, y, tol, max_iter));
        }
    }
    Ok(Raster {
        scheme,
        region,
        grid,
        tol,
        max_iter,
        counts,
    })
}

/// Outcome of checking the raster against the known convergence regions.
#[derive(Clone, Debug, Default, Serialize)]
pub struct RasterClaims {
    pub ns_wedge_points: usize,
    pub ns_wedge_converged: usize,
    pub ns_real_points: usize,
    pub ns_real_outside_converged: usize,
    pub ns_real_inside_diverged: usize,
    pub newton_real_points: usize,
    pub newton_real_diverged: usize,
    pub symmetry_violations: usize,
}

impl RasterClaims {
    pub fn holds(&self) -> bool {
        self.ns_wedge_converged == 0
            && self.ns_real_outside_converged == 0
            && self.ns_real_inside_diverged == 0
            && self.newton_real_diverged == 0
            && self.symmetry_violations == 0
    }
}

fn symmetry_violations(r: &Raster) -> usize {
    let g = r.grid;
    let mut bad = 0;
    for j in 0..g {
        for i in 0..g {
            let c = r.count(i, j);
            if c != r.count(g - 1 - i, g - 1 - j) || c != r.count(i, g - 1 - j) {
                bad += 1;
            }
        }
    }
    bad
}

/// Check the raster claims on a square region symmetric about 0:
/// Newton-Schulz diverges on `|Im z| >= 2|Re z|` and on real `|x| > sqrt5`
/// and converges on real `0 < |x| < sqrt5`; Newton converges on every
/// nonzero real point; both rasters are invariant under `z -> -z` and
/// `z -> conj z`. The grid rows need not contain the real axis, so real
/// points are taken at the raster's `x` coordinates.
pub fn check_claims(ns: &Raster, newton: &Raster) -> RasterClaims {
    let mut c = RasterClaims::default();
    let s5 = 5f64.sqrt();
    for j in 0..ns.grid {
        for i in 0..ns.grid {
            let (x, y) = (ns.x(i), ns.y(j));
            if y.abs() >= 2.0 * x.abs() {
                c.ns_wedge_points += 1;
                if ns.converged(i, j) {
                    c.ns_wedge_converged += 1;
                }
            }
        }
    }
    for i in 0..ns.grid {
        let x = ns.x(i);
        if x == 0.0 {
            continue;
        }
        c.ns_real_points += 1;
        let k = iterations(Scheme::NewtonSchulz, x, 0.0, ns.tol, ns.max_iter);
        if x.abs() > s5 && k <= ns.max_iter {
            c.ns_real_outside_converged += 1;
        }
        if x.abs() < s5 && k > ns.max_iter {
            c.ns_real_inside_diverged += 1;
        }
    }
    for i in 0..newton.grid {
        let x = newton.x(i);
        if x == 0.0 || x.abs() > 2.5 {
            continue;
        }
        c.newton_real_points += 1;
        if iterations(Scheme::Newton, x, 0.0, newton.tol, newton.max_iter) > newton.max_iter {
            c.newton_real_diverged += 1;
        }
    }
    c.symmetry_violations = symmetry_violations(ns) + symmetry_violations(newton);
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_point_takes_zero_steps() {
        assert_eq!(iterations(Scheme::Newton, 1.0, 0.0, 1e-15, 200), 0);
        assert_eq!(iterations(Scheme::NewtonSchulz, -1.0, 0.0, 1e-15, 200), 0);
    }

    #[test]
    fn known_points() {
        assert_eq!(iterations(Scheme::NewtonSchulz, 0.1, 0.3, 1e-15, 200), 201);
        assert_eq!(iterations(Scheme::NewtonSchulz, 2.3, 0.0, 1e-15, 200), 201);
        assert!(iterations(Scheme::NewtonSchulz, 2.2, 0.0, 1e-15, 200) <= 200);
        assert!(iterations(Scheme::NewtonSchulz, 0.5, 0.0, 1e-15, 200) <= 10);
        assert_eq!(iterations(Scheme::Newton, 0.0, 0.0, 1e-15, 200), 201);
        // purely imaginary starts stay on the axis under Newton
        assert_eq!(iterations(Scheme::Newton, 0.0, 0.7, 1e-15, 200), 201);
        assert!(iterations(Scheme::Newton, 2.4, -1.1, 1e-15, 200) <= 12);
    }

    #[test]
    fn symmetric_grid_coordinates() {
        for k in 0..400 {
            assert_eq!(grid_coord(-2.5, 2.5, k, 400), -grid_coord(-2.5, 2.5, 399 - k, 400));
        }
        assert_eq!(grid_coord(-2.5, 2.5, 0, 400), -2.5);
        assert_eq!(grid_coord(-2.5, 2.5, 399, 400), 2.5);
    }

    #[test]
    fn small_raster_claims() {
        let r = Region::square(2.5);
        let ns = convergence_raster(Scheme::NewtonSchulz, r, 41, 1e-15, 200).unwrap();
        let nw = convergence_raster(Scheme::Newton, r, 41, 1e-15, 200).unwrap();
        let c = check_claims(&ns, &nw);
        assert!(c.holds(), "{c:?}");
        assert!(c.ns_wedge_points > 0 && c.newton_real_points > 0);
    }

    #[test]
    fn outputs() {
        let ns = convergence_raster(Scheme::NewtonSchulz, Region::square(1.0), 3, 1e-15, 50).unwrap();
        let csv = ns.to_csv();
        assert_eq!(csv.lines().count(), 10);
        assert!(csv.contains("1,1,0e0,0e0,51"));
        let pgm = ns.to_pgm();
        assert!(pgm.starts_with(b"P5\n3 3\n255\n"));
        assert_eq!(pgm.len(), b"P5\n3 3\n255\n".len() + 9);
        assert!(convergence_raster(Scheme::Newton, Region::square(1.0), 1, 1e-15, 5).is_err());
        assert_eq!("ns".parse::<Scheme>().unwrap(), Scheme::NewtonSchulz);
        assert!("halley".parse::<Scheme>().is_err());
    }
}
