//! Helpers shared by the integration test targets.
#![allow(dead_code)]

pub mod oracle;

use numina_core::{Point3, PointSet};
use rand::Rng;

pub fn point_set(points: &[[f64; 3]]) -> PointSet {
    PointSet::new(points.iter().copied().map(Point3::from).collect()).unwrap()
}

/// Random point set inside a unit-ish box around `center`, with the requested
/// intrinsic dimension (0 = single point, 1 = collinear, 2 = coplanar, 3 = general).
pub fn random_set(rng: &mut impl Rng, n: usize, dim: usize, center: Point3, scale: f64) -> PointSet {
    let axis = |rng: &mut dyn rand::RngCore| {
        let v = Point3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        v * (1.0 / v.norm().max(1e-12))
    };
    let u = axis(rng);
    let w = axis(rng);
    let pts: Vec<Point3> = (0..n.max(1))
        .map(|_| match dim {
            0 => center,
            1 => center + u * (scale * rng.gen_range(-0.5..0.5)),
            2 => center + u * (scale * rng.gen_range(-0.5..0.5)) + w * (scale * rng.gen_range(-0.5..0.5)),
            _ => {
                center
                    + Point3::new(
                        scale * rng.gen_range(-0.5..0.5),
                        scale * rng.gen_range(-0.5..0.5),
                        scale * rng.gen_range(-0.5..0.5),
                    )
            }
        })
        .collect();
    PointSet::new(pts).unwrap()
}

/// Decimal rounding reference built on integer arithmetic over the shortest
/// decimal representation: keep two fractional digits, bump when the third
/// digit is 5 or more.
pub fn round2_reference(v: f64) -> String {
    assert!(v >= 0.0);
    let text = format!("{v}");
    let (int_part, frac_part) = match text.split_once('.') {
        Some((i, f)) => (i.to_string(), f.to_string()),
        None => (text.clone(), String::new()),
    };
    let mut frac: Vec<u8> = frac_part.bytes().map(|b| b - b'0').collect();
    frac.resize(3, 0);
    let mut hundredths: u128 = int_part.parse::<u128>().unwrap() * 100 + frac[0] as u128 * 10 + frac[1] as u128;
    if frac[2] >= 5 {
        hundredths += 1;
    }
    format!("{}.{:02}", hundredths / 100, hundredths % 100)
}
