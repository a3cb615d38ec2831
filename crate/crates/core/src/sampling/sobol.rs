//! Sobol low-discrepancy sequence with Joe–Kuo direction numbers.

use crate::error::{Error, Result};

const BITS: usize = 32;

/// `(degree s, coefficients a, initial m_1..m_s)` for dimensions 2 onward.
const JOE_KUO: &[(u32, u32, &[u32])] = &[
    (1, 0, &[1]),
    (2, 1, &[1, 3]),
    (3, 1, &[1, 3, 1]),
    (3, 2, &[1, 1, 1]),
    (4, 1, &[1, 1, 3, 3]),
    (4, 4, &[1, 3, 5, 13]),
    (5, 2, &[1, 1, 5, 5, 17]),
    (5, 4, &[1, 1, 5, 5, 5]),
    (5, 7, &[1, 1, 7, 11, 19]),
    (5, 11, &[1, 1, 5, 1, 1]),
    (5, 13, &[1, 1, 1, 3, 11]),
    (5, 14, &[1, 3, 5, 5, 31]),
    (6, 1, &[1, 3, 3, 9, 7, 49]),
    (6, 13, &[1, 1, 1, 15, 21, 21]),
    (6, 16, &[1, 3, 1, 13, 27, 49]),
    (6, 19, &[1, 1, 1, 15, 7, 5]),
    (6, 22, &[1, 3, 1, 15, 13, 25]),
    (6, 25, &[1, 1, 5, 5, 19, 61]),
    (7, 1, &[1, 3, 7, 11, 23, 15, 103]),
    (7, 4, &[1, 3, 7, 13, 13, 15, 69]),
];

pub const MAX_DIMENSION: usize = JOE_KUO.len() + 1;

/// Direction numbers for the first `dimension` coordinates.
#[derive(Debug, Clone)]
pub struct SobolSequence {
    directions: Vec<[u32; BITS]>,
}

impl SobolSequence {
    pub fn new(dimension: usize) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidArgument("Sobol dimension must be at least 1".into()));
        }
        if dimension > MAX_DIMENSION {
            return Err(Error::SobolDimension { requested: dimension, max: MAX_DIMENSION });
        }
        let mut directions = Vec::with_capacity(dimension);
        let mut first = [0u32; BITS];
        for (k, v) in first.iter_mut().enumerate() {
            *v = 1 << (BITS - 1 - k);
        }
        directions.push(first);
        for &(s, a, m) in &JOE_KUO[..dimension - 1] {
            let s = s as usize;
            let mut v = [0u32; BITS];
            for k in 0..BITS {
                v[k] = if k < s {
                    m[k] << (BITS - 1 - k)
                } else {
                    let mut x = v[k - s] ^ (v[k - s] >> s);
                    for j in 1..s {
                        if (a >> (s - 1 - j)) & 1 == 1 {
                            x ^= v[k - j];
                        }
                    }
                    x
                };
            }
            directions.push(v);
        }
        Ok(SobolSequence { directions })
    }

    pub fn dimension(&self) -> usize {
        self.directions.len()
    }

    /// Integer coordinates of point `index` (gray-code ordering, point 0 is the origin).
    pub fn point_bits(&self, index: u64, out: &mut [u32]) {
        let gray = index ^ (index >> 1);
        for (o, v) in out.iter_mut().zip(&self.directions) {
            let mut x = 0u32;
            let mut g = gray;
            let mut k = 0;
            while g != 0 && k < BITS {
                if g & 1 == 1 {
                    x ^= v[k];
                }
                g >>= 1;
                k += 1;
            }
            *o = x;
        }
    }

    pub fn point(&self, index: u64, out: &mut [f64]) {
        let mut bits = vec![0u32; self.dimension()];
        self.point_bits(index, &mut bits);
        for (o, b) in out.iter_mut().zip(bits) {
            *o = f64::from(b) / 4_294_967_296.0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Unscrambled reference points from an independent Sobol implementation,
    /// coordinates 1, 2, 3, 6, 10, 11 and 21.
    const REFERENCE: &[(u64, [f64; 7])] = &[
        (1, [0.5; 7]),
        (2, [0.75, 0.25, 0.25, 0.75, 0.75, 0.75, 0.25]),
        (3, [0.25, 0.75, 0.75, 0.25, 0.25, 0.25, 0.75]),
        (7, [0.125, 0.625, 0.375, 0.375, 0.875, 0.625, 0.875]),
        (100, [0.4140625, 0.2578125, 0.7734375, 0.7421875, 0.6953125, 0.4609375, 0.7578125]),
        (
            1023,
            [0.0009765625, 0.7529296875, 0.6123046875, 0.4384765625, 0.8505859375, 0.6787109375, 0.8662109375],
        ),
        (
            1099,
            [
                0.46240234375,
                0.58740234375,
                0.56494140625,
                0.72705078125,
                0.64794921875,
                0.81396484375,
                0.75146484375,
            ],
        ),
    ];

    #[test]
    fn matches_reference_points() {
        let s = SobolSequence::new(MAX_DIMENSION).unwrap();
        let mut x = vec![0.0; MAX_DIMENSION];
        for (index, expected) in REFERENCE {
            s.point(*index, &mut x);
            for (pos, &dim) in [0, 1, 2, 5, 9, 10, 20].iter().enumerate() {
                assert_eq!(x[dim], expected[pos], "point {index}, coordinate {dim}");
            }
        }
        s.point(0, &mut x);
        assert!(x.iter().all(|&c| c == 0.0));
    }

    #[test]
    fn first_one_dimensional_points() {
        let s = SobolSequence::new(1).unwrap();
        let mut x = [0.0];
        let pts: Vec<f64> = (1..4)
            .map(|i| {
                s.point(i, &mut x);
                x[0]
            })
            .collect();
        assert_eq!(pts, vec![0.5, 0.75, 0.25]);
    }

    #[test]
    fn dyadic_stratification() {
        let s = SobolSequence::new(MAX_DIMENSION).unwrap();
        let mut x = vec![0.0; MAX_DIMENSION];
        for k in 0..=10u32 {
            let n = 1usize << k;
            let mut counts = vec![vec![0u32; n]; MAX_DIMENSION];
            for i in 0..n as u64 {
                s.point(i, &mut x);
                for (d, &c) in x.iter().enumerate() {
                    counts[d][(c * n as f64) as usize] += 1;
                }
            }
            assert!(counts.iter().flatten().all(|&c| c == 1), "k = {k}");
        }
    }

    #[test]
    fn rejects_bad_dimensions() {
        assert!(SobolSequence::new(0).is_err());
        assert!(matches!(SobolSequence::new(MAX_DIMENSION + 1), Err(Error::SobolDimension { .. })));
    }
}
