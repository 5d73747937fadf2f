use rand::Rng;

use super::PmfTable;
use crate::error::{Error, Result};

/// Tables must capture at least `1 - MIN_MASS_SLACK` to be sampled.
const MIN_MASS_SLACK: f64 = 1e-12;

/// Inversion sampler over a precomputed table of cumulative sums.
#[derive(Debug, Clone)]
pub struct InversionSampler {
    offset: i64,
    cumulative: Vec<f64>,
}

impl InversionSampler {
    pub fn new(table: &PmfTable) -> Result<Self> {
        if table.captured_mass() < 1.0 - MIN_MASS_SLACK {
            return Err(Error::TableMass {
                captured: table.captured_mass(),
                tolerance: MIN_MASS_SLACK,
            });
        }
        let cumulative = table
            .probs()
            .iter()
            .scan(0.0, |acc, p| {
                *acc += p;
                Some(*acc)
            })
            .collect();
        Ok(InversionSampler {
            offset: table.offset(),
            cumulative,
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> i64 {
        let total = *self.cumulative.last().expect("tables are non-empty");
        let u = rng.gen::<f64>() * total;
        let idx = self
            .cumulative
            .partition_point(|&c| c <= u)
            .min(self.cumulative.len() - 1);
        self.offset + idx as i64
    }
}

/// One draw from `table` by inversion; builds the cumulative sums each call,
/// so prefer [`InversionSampler`] for repeated draws.
pub fn sample_by_inversion<R: Rng + ?Sized>(table: &PmfTable, rng: &mut R) -> Result<i64> {
    Ok(InversionSampler::new(table)?.sample(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn point_mass_always_returns_its_atom() {
        let s = InversionSampler::new(&PmfTable::point_mass(0)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!((0..1000).all(|_| s.sample(&mut rng) == 0));
    }

    #[test]
    fn deterministic_per_seed() {
        let t = PmfTable::new(-2, vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let s = InversionSampler::new(&t).unwrap();
        let run = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..100).map(|_| s.sample(&mut rng)).collect::<Vec<_>>()
        };
        assert_eq!(run(11), run(11));
        assert!(run(11).iter().all(|x| (-2..=1).contains(x)));
    }

    #[test]
    fn rejects_light_tables() {
        let t = PmfTable::new(0, vec![0.5, 0.4]).unwrap();
        assert!(matches!(
            InversionSampler::new(&t),
            Err(Error::TableMass { .. })
        ));
    }

    #[test]
    fn zero_probability_atoms_are_never_drawn() {
        let t = PmfTable::new(0, vec![0.0, 0.5, 0.0, 0.5, 0.0]).unwrap();
        let s = InversionSampler::new(&t).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        assert!((0..10_000).all(|_| matches!(s.sample(&mut rng), 1 | 3)));
    }
}
