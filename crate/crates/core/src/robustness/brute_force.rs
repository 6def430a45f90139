use crate::error::{Error, Result};
use crate::free_sets::FreeSet;
use crate::linalg::bloch::bloch_vector;
use crate::linalg::hermitian::QuantumState;

/// Facet inequalities `n·r ≤ b` of the convex hull of 3-d points.
fn facets(points: &[[f64; 3]]) -> Vec<([f64; 3], f64)> {
    let mut out: Vec<([f64; 3], f64)> = Vec::new();
    let n = points.len();
    for i in 0..n {
        for j in (i + 1)..n {
            for k in (j + 1)..n {
                let (a, b, c) = (points[i], points[j], points[k]);
                let u = sub(b, a);
                let v = sub(c, a);
                let mut normal = cross(u, v);
                let len = dot(normal, normal).sqrt();
                if len < 1e-12 {
                    continue;
                }
                normal = normal.map(|x| x / len);
                let mut offset = dot(normal, a);
                let signs: Vec<f64> = points.iter().map(|p| dot(normal, *p) - offset).collect();
                let above = signs.iter().any(|s| *s > 1e-10);
                let below = signs.iter().any(|s| *s < -1e-10);
                if above && below {
                    continue;
                }
                if above {
                    normal = normal.map(|x| -x);
                    offset = -offset;
                }
                if !out.iter().any(|(m, o)| dot(*m, normal) > 1.0 - 1e-10 && (o - offset).abs() < 1e-10) {
                    out.push((normal, offset));
                }
            }
        }
    }
    out
}

/// Independent grid oracle for qubit polytopes: over noise Bloch vectors `t`
/// on a `grid³` lattice in the unit ball, the smallest `s` with
/// `(r + s t)/(1+s)` inside the polytope.
///
/// For each `t` the segment `r → t` is intersected exactly with the facet
/// halfspaces, so the only discretization error comes from the lattice.
pub fn brute_force_robustness_qubit(rho: &QuantumState, f: &FreeSet, grid: usize) -> Result<f64> {
    if rho.dim() != 2 || f.dim() != 2 {
        return Err(Error::UnsupportedDimension("Bloch-grid oracle needs qubits".into()));
    }
    if !f.is_polytope() {
        return Err(Error::invalid("Bloch-grid oracle needs a polytope free set"));
    }
    if grid < 2 {
        return Err(Error::invalid("grid must be at least 2"));
    }
    let points: Vec<[f64; 3]> = f.vertices().iter().map(|v| bloch_vector(v.matrix())).collect();
    let planes = facets(&points);
    if planes.len() < 4 {
        return Err(Error::invalid("Bloch polytope is not full-dimensional"));
    }
    let r = bloch_vector(rho.matrix());
    let inside = |p: [f64; 3]| planes.iter().all(|(n, b)| dot(*n, p) <= b + 1e-12);
    if inside(r) {
        return Ok(0.0);
    }
    let nr: Vec<f64> = planes.iter().map(|(n, _)| dot(*n, r)).collect();
    let step = 2.0 / (grid - 1) as f64;
    let mut best = f64::INFINITY;
    for i in 0..grid {
        let x = -1.0 + i as f64 * step;
        for j in 0..grid {
            let y = -1.0 + j as f64 * step;
            if x * x + y * y > 1.0 + 1e-12 {
                continue;
            }
            for k in 0..grid {
                let z = -1.0 + k as f64 * step;
                let t = [x, y, z];
                if dot(t, t) > 1.0 + 1e-12 {
                    continue;
                }
                // point (1−λ) r + λ t must satisfy n·r + λ (n·t − n·r) ≤ b
                let mut lo: f64 = 0.0;
                let mut hi: f64 = 1.0;
                for ((n, b), nrv) in planes.iter().zip(&nr) {
                    let slope = dot(*n, t) - nrv;
                    let room = b - nrv;
                    if slope.abs() < 1e-15 {
                        if room < -1e-12 {
                            hi = -1.0;
                        }
                    } else if slope > 0.0 {
                        hi = hi.min(room / slope);
                    } else {
                        lo = lo.max(room / slope);
                    }
                }
                if lo <= hi && lo < 1.0 {
                    let s = lo / (1.0 - lo);
                    if s < best {
                        best = s;
                    }
                }
            }
        }
    }
    Ok(best)
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}
