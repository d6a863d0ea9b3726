//! Unscrambled Sobol sequence in Gray-code order, 32-bit resolution, using
//! the Joe–Kuo `new-joe-kuo-6.21201` direction numbers.

use crate::error::{Error, Result};

const BITS: usize = 32;

/// `(degree s, coefficient bits a, initial m_1..m_s)` for dimensions 2..=21.
/// Dimension 1 uses m_i = 1 throughout.
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

/// Largest supported dimension.
pub const MAX_DIMENSION: usize = JOE_KUO.len() + 1;

/// Generator state. The index-0 point (all zeros) is never emitted; the first
/// draw is index 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SobolState {
    dimension: usize,
    directions: Vec<[u32; BITS]>,
    current: Vec<u32>,
    index: u64,
}

impl SobolState {
    pub fn new(dimension: usize) -> Result<Self> {
        Self::starting_at(dimension, 0)
    }

    /// State positioned so that the next draw is point `index + 1`.
    pub fn starting_at(dimension: usize, index: u64) -> Result<Self> {
        if dimension == 0 || dimension > MAX_DIMENSION {
            return Err(Error::domain(format!(
                "Sobol dimension must be in 1..={MAX_DIMENSION}, got {dimension}"
            )));
        }
        if index >= (1u64 << BITS) {
            return Err(Error::domain("Sobol index beyond 2^32"));
        }
        let directions: Vec<[u32; BITS]> = (0..dimension).map(direction_numbers).collect();
        let gray = index ^ (index >> 1);
        let current = directions
            .iter()
            .map(|v| {
                (0..BITS)
                    .filter(|b| gray >> b & 1 == 1)
                    .fold(0u32, |acc, b| acc ^ v[b])
            })
            .collect();
        Ok(SobolState {
            dimension,
            directions,
            current,
            index,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Index of the most recently emitted point (0 before the first draw).
    pub fn index(&self) -> u64 {
        self.index
    }

    /// Next point in `[0, 1)^d`, or `None` once all 2^32 points are used.
    pub fn next_point(&mut self) -> Option<Vec<f64>> {
        self.next_raw().map(|raw| {
            raw.iter()
                .map(|&x| x as f64 / (1u64 << BITS) as f64)
                .collect()
        })
    }

    /// Next point as 32-bit fixed-point numerators.
    pub fn next_raw(&mut self) -> Option<Vec<u32>> {
        if self.index + 1 >= (1u64 << BITS) {
            return None;
        }
        // Gray-code step: flip the direction number at the lowest zero bit of
        // the previous index.
        let c = (!self.index).trailing_zeros() as usize;
        for (x, v) in self.current.iter_mut().zip(&self.directions) {
            *x ^= v[c];
        }
        self.index += 1;
        Some(self.current.clone())
    }
}

impl Iterator for SobolState {
    type Item = Vec<f64>;

    fn next(&mut self) -> Option<Vec<f64>> {
        self.next_point()
    }
}

fn direction_numbers(dim: usize) -> [u32; BITS] {
    let mut v = [0u32; BITS];
    if dim == 0 {
        for (i, x) in v.iter_mut().enumerate() {
            *x = 1 << (BITS - 1 - i);
        }
        return v;
    }
    let (s, a, m) = JOE_KUO[dim - 1];
    let s = s as usize;
    for i in 0..s.min(BITS) {
        v[i] = m[i] << (BITS - 1 - i);
    }
    for i in s..BITS {
        let mut x = v[i - s] ^ (v[i - s] >> s);
        for k in 1..s {
            if (a >> (s - 1 - k)) & 1 == 1 {
                x ^= v[i - k];
            }
        }
        v[i] = x;
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_draw_is_center() {
        let mut s = SobolState::new(4).unwrap();
        assert_eq!(s.next_point().unwrap(), vec![0.5; 4]);
        assert_eq!(s.index(), 1);
    }

    #[test]
    fn second_and_third_points_in_two_dims() {
        let mut s = SobolState::new(2).unwrap();
        s.next_point();
        assert_eq!(s.next_point().unwrap(), vec![0.75, 0.25]);
        assert_eq!(s.next_point().unwrap(), vec![0.25, 0.75]);
    }

    #[test]
    fn equal_states_give_equal_sequences() {
        let mut a = SobolState::new(4).unwrap();
        let mut b = SobolState::new(4).unwrap();
        for _ in 0..1000 {
            assert_eq!(a.next_point(), b.next_point());
        }
    }

    #[test]
    fn starting_at_matches_sequential() {
        let mut seq = SobolState::new(6).unwrap();
        for _ in 0..777 {
            seq.next_raw();
        }
        let mut jumped = SobolState::starting_at(6, 777).unwrap();
        for _ in 0..50 {
            assert_eq!(seq.next_raw(), jumped.next_raw());
        }
    }

    #[test]
    fn coordinate_means() {
        let pts: Vec<_> = SobolState::new(4).unwrap().take(4096).collect();
        for d in 0..4 {
            assert!(pts.iter().all(|p| (0.0..1.0).contains(&p[d])));
            let mean = pts.iter().map(|p| p[d]).sum::<f64>() / pts.len() as f64;
            assert!((0.45..=0.55).contains(&mean), "dim {d} mean {mean}");
        }
    }

    #[test]
    fn dimension_limits() {
        assert!(SobolState::new(0).is_err());
        assert!(SobolState::new(MAX_DIMENSION).is_ok());
        assert!(SobolState::new(MAX_DIMENSION + 1).is_err());
    }
}
