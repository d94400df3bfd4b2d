//! Independent hull-distance reference: block pairwise Frank-Wolfe on the
//! product of the two simplices with exact line search, stopped by a
//! separating-axis dual bound.

use numina_core::{Point3, PointSet};

pub struct OracleResult {
    pub distance: f64,
    pub lower_bound: f64,
    pub iterations: usize,
}

pub fn hull_distance_oracle(a: &PointSet, b: &PointSet) -> OracleResult {
    let a = a.points();
    let b = b.points();
    let mut lam = vec![0.0; a.len()];
    let mut mu = vec![0.0; b.len()];
    // Start from the closest vertex pair.
    let (mut bi, mut bj, mut best) = (0, 0, f64::INFINITY);
    for (i, p) in a.iter().enumerate() {
        for (j, q) in b.iter().enumerate() {
            let d = (*p - *q).norm_squared();
            if d < best {
                best = d;
                bi = i;
                bj = j;
            }
        }
    }
    lam[bi] = 1.0;
    mu[bj] = 1.0;

    let combine = |lam: &[f64], mu: &[f64]| {
        let mut v = Point3::ORIGIN;
        for (w, p) in lam.iter().zip(a) {
            v = v + *p * *w;
        }
        for (w, q) in mu.iter().zip(b) {
            v = v - *q * *w;
        }
        v
    };

    let mut v = combine(&lam, &mu);
    let mut lower = 0.0f64;
    let max_iter = 400_000;
    let mut it = 0;
    while it < max_iter {
        it += 1;
        if it % 1000 == 0 {
            // Refresh against drift from incremental updates.
            v = combine(&lam, &mu);
        }
        let vn = v.norm();
        if vn <= 1e-13 {
            break;
        }
        let u = v * (1.0 / vn);
        let min_a = a.iter().map(|p| p.dot(u)).fold(f64::INFINITY, f64::min);
        let max_b = b.iter().map(|q| q.dot(u)).fold(f64::NEG_INFINITY, f64::max);
        lower = lower.max(min_a - max_b);
        if vn - lower <= 1e-11 {
            break;
        }

        // Block A: move weight from the worst active vertex to the best vertex.
        let s = argmin(a.len(), |i| a[i].dot(v));
        let away = argmax_active(&lam, |i| a[i].dot(v));
        if s != away {
            let d = a[s] - a[away];
            let dd = d.norm_squared();
            if dd > 0.0 {
                let g = (-(v.dot(d)) / dd).clamp(0.0, lam[away]);
                if g > 0.0 {
                    lam[s] += g;
                    lam[away] -= g;
                    v = v + d * g;
                }
            }
        }
        // Block B: the objective decreases along b·v.
        let t = argmax(b.len(), |j| b[j].dot(v));
        let away = argmin_active(&mu, |j| b[j].dot(v));
        if t != away {
            let d = b[away] - b[t];
            let dd = d.norm_squared();
            if dd > 0.0 {
                let g = (-(v.dot(d)) / dd).clamp(0.0, mu[away]);
                if g > 0.0 {
                    mu[t] += g;
                    mu[away] -= g;
                    v = v + d * g;
                }
            }
        }
    }
    let v = combine(&lam, &mu);
    OracleResult {
        distance: v.norm(),
        lower_bound: lower,
        iterations: it,
    }
}

fn argmin(n: usize, f: impl Fn(usize) -> f64) -> usize {
    (0..n).fold(0, |best, i| if f(i) < f(best) { i } else { best })
}

fn argmax(n: usize, f: impl Fn(usize) -> f64) -> usize {
    (0..n).fold(0, |best, i| if f(i) > f(best) { i } else { best })
}

fn argmax_active(w: &[f64], f: impl Fn(usize) -> f64) -> usize {
    let mut best = None;
    for i in 0..w.len() {
        if w[i] > 0.0 && best.map_or(true, |b| f(i) > f(b)) {
            best = Some(i);
        }
    }
    best.unwrap()
}

fn argmin_active(w: &[f64], f: impl Fn(usize) -> f64) -> usize {
    let mut best = None;
    for i in 0..w.len() {
        if w[i] > 0.0 && best.map_or(true, |b| f(i) < f(b)) {
            best = Some(i);
        }
    }
    best.unwrap()
}
