//! Seeded random instances. The same configuration and seed always give the
//! same points and queries.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::Dataset;
use crate::types::{BoxQuery, Count, Interval, MaxWeight, Side, TextWeight};

/// Weight types the generator knows how to draw.
pub trait SampleWeight: TextWeight {
    fn sample(rng: &mut ChaCha8Rng) -> Self;
}

impl SampleWeight for Count {
    fn sample(_rng: &mut ChaCha8Rng) -> Self {
        Count(1)
    }
}

impl SampleWeight for MaxWeight {
    fn sample(rng: &mut ChaCha8Rng) -> Self {
        MaxWeight(rng.gen_range(-1000..=1000))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenConfig {
    pub points: usize,
    pub dims: usize,
    pub colors: usize,
    pub queries: usize,
    pub seed: u64,
    /// Every color gets `points / colors` points, give or take one.
    pub equal_classes: bool,
    /// Query shape per axis.
    pub sides: Vec<Side>,
    /// Coordinates are integers in `[0, coord_range)`; `None` uses the
    /// point count, which makes duplicates common.
    pub coord_range: Option<u64>,
}

impl GenConfig {
    pub fn new(points: usize, dims: usize, colors: usize) -> Self {
        GenConfig {
            points,
            dims,
            colors,
            queries: 0,
            seed: 0,
            equal_classes: false,
            sides: vec![Side::Upper; dims],
            coord_range: None,
        }
    }

    fn range(&self) -> u64 {
        self.coord_range.unwrap_or(self.points as u64).max(1)
    }
}

fn stream(seed: u64, salt: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(salt);
    rng
}

/// Uniform points labelled `c0, c1, ...`. In the default mode the first
/// `colors` points take one color each, so all colors occur whenever
/// `colors <= points`; the rest are uniform.
pub fn gen_dataset<W: SampleWeight>(cfg: &GenConfig) -> Dataset<W>
where
    <W as std::str::FromStr>::Err: std::fmt::Display,
{
    let mut coords_rng = stream(cfg.seed, 1);
    let mut color_rng = stream(cfg.seed, 2);
    let mut weight_rng = stream(cfg.seed, 3);
    let range = cfg.range();
    let phi = cfg.colors.max(1);
    let mut ds = Dataset::new(cfg.dims);
    for i in 0..cfg.points {
        let coords = (0..cfg.dims)
            .map(|_| coords_rng.gen_range(0..range) as f64)
            .collect();
        let color = if cfg.equal_classes || i < phi {
            i % phi
        } else {
            color_rng.gen_range(0..phi)
        };
        ds.push(coords, &format!("c{color}"), W::sample(&mut weight_rng));
    }
    ds
}

/// Random boxes shaped by `cfg.sides`, with bounds reaching slightly past
/// the coordinate range on both ends.
pub fn gen_queries(cfg: &GenConfig) -> Vec<BoxQuery> {
    let mut rng = stream(cfg.seed, 4);
    let hi = cfg.range() as i64;
    let draw = |rng: &mut ChaCha8Rng| rng.gen_range(-1..=hi) as f64;
    (0..cfg.queries)
        .map(|_| {
            BoxQuery::new(
                cfg.sides
                    .iter()
                    .map(|side| match side {
                        Side::Upper => Interval::at_most(draw(&mut rng)),
                        Side::Lower => Interval::at_least(draw(&mut rng)),
                        Side::Both => {
                            let (a, b) = (draw(&mut rng), draw(&mut rng));
                            Interval::new(a.min(b), a.max(b))
                        }
                    })
                    .collect(),
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::ColorId;

    #[test]
    fn deterministic() {
        let mut cfg = GenConfig::new(100, 3, 7);
        cfg.queries = 20;
        cfg.seed = 7;
        cfg.sides = vec![Side::Both, Side::Lower, Side::Upper];
        let a: Dataset<MaxWeight> = gen_dataset(&cfg);
        let b: Dataset<MaxWeight> = gen_dataset(&cfg);
        assert_eq!(a.to_text(), b.to_text());
        assert_eq!(gen_queries(&cfg), gen_queries(&cfg));
        cfg.seed = 8;
        assert_ne!(gen_dataset::<MaxWeight>(&cfg).to_text(), a.to_text());
    }

    #[test]
    fn all_colors_distinct_when_phi_is_n() {
        let ds: Dataset<Count> = gen_dataset(&GenConfig::new(50, 2, 50));
        assert_eq!(ds.labels.len(), 50);
    }

    #[test]
    fn equal_classes() {
        let mut cfg = GenConfig::new(60, 2, 4);
        cfg.equal_classes = true;
        let ds: Dataset<Count> = gen_dataset(&cfg);
        for c in 0..4 {
            assert_eq!(ds.points.iter().filter(|p| p.color == ColorId(c)).count(), 15);
        }
    }

    #[test]
    fn count_and_max_share_coordinates() {
        let cfg = GenConfig::new(30, 2, 3);
        let a: Dataset<Count> = gen_dataset(&cfg);
        let b: Dataset<MaxWeight> = gen_dataset(&cfg);
        for (p, q) in a.points.iter().zip(&b.points) {
            assert_eq!(p.coords, q.coords);
            assert_eq!(p.color, q.color);
        }
    }
}
