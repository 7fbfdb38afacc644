#![allow(dead_code)]

use std::path::Path;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use texref_core::{ChannelPlane, ElbpConfig, FeatureVector, RgbImage};

pub const CORPUS_SIDE: u32 = 96;
/// Smallest checkerboard period. Periods must stay above half the largest
/// one or the coarsest boards drift toward the flat images.
pub const FIRST_PERIOD: u32 = 10;
pub const PER_CLASS: u32 = 10;

/// Checkerboard with square cells of `period` pixels.
pub fn checkerboard(side: u32, period: u32) -> RgbImage {
    RgbImage::from_fn(side, side, |x, y| {
        if (x / period + y / period).is_multiple_of(2) {
            [230, 200, 40]
        } else {
            [20, 60, 180]
        }
    })
}

/// Writes a two-class corpus with Simplicity-style names: ids `0..10` are
/// constant images with distinct gray levels (class 0), ids `100..110` are
/// checkerboards with distinct periods (class 1).
pub fn write_two_class_corpus(root: &Path) {
    for i in 0..PER_CLASS {
        let level = (20 + 21 * i) as u8;
        image::RgbImage::from_pixel(CORPUS_SIDE, CORPUS_SIDE, image::Rgb([level; 3]))
            .save(root.join(format!("{i}.png")))
            .unwrap();
        let board = checkerboard(CORPUS_SIDE, FIRST_PERIOD + i);
        image::RgbImage::from_raw(
            CORPUS_SIDE,
            CORPUS_SIDE,
            board.pixels().iter().flatten().copied().collect(),
        )
        .unwrap()
        .save(root.join(format!("{}.png", 100 + i)))
        .unwrap();
    }
}

pub fn random_plane(rng: &mut StdRng, width: u32, height: u32) -> ChannelPlane {
    ChannelPlane::from_fn(width, height, |_, _| rng.gen())
}

pub fn random_image(rng: &mut StdRng, width: u32, height: u32) -> RgbImage {
    RgbImage::from_fn(width, height, |_, _| rng.gen())
}

/// Random feature vector whose six blocks are probability distributions.
pub fn random_features(rng: &mut StdRng, p: usize) -> FeatureVector {
    let mut values = Vec::new();
    for len in [p + 2, p + 1].repeat(3) {
        let raw: Vec<f64> = (0..len).map(|_| rng.gen::<f64>()).collect();
        let sum: f64 = raw.iter().sum();
        values.extend(raw.into_iter().map(|v| v / sum));
    }
    FeatureVector::from_values(p, values).unwrap()
}

pub fn seeded(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

// ---------------------------------------------------------------------------
// Naive reference implementations. They share no code with the library:
// geometry, bit extraction, transition counting and labeling are all written
// out directly from the operator definitions.
// ---------------------------------------------------------------------------

/// Ring offsets: R = 1 is the Moore neighborhood, larger radii the circle.
pub fn ring_offsets(radius: u32) -> Vec<(f64, f64)> {
    let p = 8 * radius as usize;
    (0..p)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / p as f64;
            let (dx, dy) = (radius as f64 * theta.cos(), -(radius as f64) * theta.sin());
            if radius == 1 {
                let m = dx.abs().max(dy.abs());
                ((dx / m).round(), (dy / m).round())
            } else {
                let snap = |v: f64| if (v - v.round()).abs() < 1e-9 { v.round() } else { v };
                (snap(dx), snap(dy))
            }
        })
        .collect()
}

/// Neighbor intensity at `(cx + dx, cy + dy)`, bilinear on center-relative
/// differences.
pub fn naive_sample(plane: &ChannelPlane, cx: u32, cy: u32, dx: f64, dy: f64) -> f64 {
    let c = plane.get(cx, cy) as f64;
    let at = |x: i64, y: i64| plane.get(x as u32, y as u32) as f64 - c;
    let (x, y) = (cx as f64 + dx, cy as f64 + dy);
    let (x0, y0) = (x.floor(), y.floor());
    let (fx, fy) = (x - x0, y - y0);
    let (x0, y0) = (x0 as i64, y0 as i64);
    if fx == 0.0 && fy == 0.0 {
        return c + at(x0, y0);
    }
    let top = at(x0, y0) + fx * (at(x0 + 1, y0) - at(x0, y0));
    let bottom = at(x0, y0 + 1) + fx * (at(x0 + 1, y0 + 1) - at(x0, y0 + 1));
    let v = top + fy * (bottom - top);
    c + if v.abs() < 1e-9 { 0.0 } else { v }
}

pub fn naive_bits(center: f64, neighbors: &[f64]) -> Vec<u8> {
    neighbors.iter().map(|&v| u8::from(v - center >= 0.0)).collect()
}

pub fn naive_code(bits: &[u8]) -> u64 {
    let mut code = 0u64;
    let mut weight = 1u64;
    for &b in bits {
        code += b as u64 * weight;
        weight *= 2;
    }
    code
}

pub fn naive_uniformity(bits: &[u8]) -> u32 {
    let p = bits.len();
    let mut u = (bits[0] as i32 - bits[p - 1] as i32).unsigned_abs();
    for k in 1..p {
        u += (bits[k] as i32 - bits[k - 1] as i32).unsigned_abs();
    }
    u
}

pub fn naive_label(bits: &[u8], threshold: u32) -> usize {
    if naive_uniformity(bits) <= threshold {
        bits.iter().filter(|&&b| b == 1).count()
    } else {
        bits.len() + 1
    }
}

pub fn naive_elbp_histogram(plane: &ChannelPlane, config: &ElbpConfig) -> Vec<f64> {
    let r = config.spec.radius();
    let p = config.spec.neighbors();
    let offsets = ring_offsets(r);
    let mut counts = vec![0u64; p + 2];
    let mut total = 0u64;
    for cy in r..plane.height() - r {
        for cx in r..plane.width() - r {
            let center = plane.get(cx, cy) as f64;
            let neighbors: Vec<f64> = offsets
                .iter()
                .map(|&(dx, dy)| naive_sample(plane, cx, cy, dx, dy))
                .collect();
            counts[naive_label(&naive_bits(center, &neighbors), config.uniformity_threshold)] += 1;
            total += 1;
        }
    }
    counts.iter().map(|&c| c as f64 / total as f64).collect()
}

pub fn naive_prepu_histogram(edges: &[Vec<bool>], radius: u32) -> Vec<f64> {
    let (h, w) = (edges.len() as u32, edges[0].len() as u32);
    let p = 8 * radius as usize;
    let offsets: Vec<(i64, i64)> = ring_offsets(radius)
        .into_iter()
        .map(|(dx, dy)| (dx.round() as i64, dy.round() as i64))
        .collect();
    let mut counts = vec![0u64; p + 1];
    let mut total = 0u64;
    for cy in radius..h - radius {
        for cx in radius..w - radius {
            let label = if edges[cy as usize][cx as usize] {
                offsets
                    .iter()
                    .filter(|&&(dx, dy)| edges[(cy as i64 + dy) as usize][(cx as i64 + dx) as usize])
                    .count()
            } else {
                0
            };
            counts[label] += 1;
            total += 1;
        }
    }
    counts.iter().map(|&c| c as f64 / total as f64).collect()
}

/// Sum of six independent square roots, one per histogram block.
pub fn naive_block_euclidean(a: &[f64], b: &[f64], p: usize) -> f64 {
    let mut start = 0;
    let mut total = 0.0;
    for len in [p + 2, p + 1, p + 2, p + 1, p + 2, p + 1] {
        let mut s = 0.0;
        for j in start..start + len {
            s += (a[j] - b[j]) * (a[j] - b[j]);
        }
        total += s.sqrt();
        start += len;
    }
    total
}
