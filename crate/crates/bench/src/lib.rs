//! Synthetic inputs shared by the benchmarks.

use rand::{Rng, SeedableRng};
use rand::rngs::StdRng;
use texref_core::{extract_features, ExtractionConfig, FeatureVector, RgbImage};

/// A noisy image with a few smooth gradients, roughly photo-like in its
/// edge density.
pub fn synthetic_image(width: u32, height: u32, seed: u64) -> RgbImage {
    let mut rng = StdRng::seed_from_u64(seed);
    let (a, b, c): (u32, u32, u32) = (rng.gen_range(1..8), rng.gen_range(1..8), rng.gen_range(1..8));
    RgbImage::from_fn(width, height, |x, y| {
        let noise: u8 = rng.gen_range(0..24);
        [
            ((x * a + y) % 200) as u8 + noise,
            ((y * b) % 220) as u8 + noise / 2,
            (((x + y) * c) % 180) as u8 + noise,
        ]
    })
}

/// `count` feature vectors of synthetic images for ranking benchmarks.
pub fn synthetic_features(count: usize, radius: u32) -> Vec<FeatureVector> {
    let config = ExtractionConfig::new(radius).expect("valid radius");
    (0..count)
        .map(|i| extract_features(&synthetic_image(48, 32, i as u64), &config).expect("large enough"))
        .collect()
}
