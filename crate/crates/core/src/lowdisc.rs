//! Seeded Halton points.
//!
//! A seed picks a Cranley–Patterson rotation (a shift modulo one per axis),
//! so different seeds give different but equally well spread point sets.

const PRIMES: [u64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

/// Maximum dimension of the sequence.
pub const MAX_HALTON_DIM: usize = PRIMES.len();

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    r
}

#[derive(Debug, Clone)]
pub struct Halton {
    dim: usize,
    shift: [f64; MAX_HALTON_DIM],
    index: u64,
}

impl Halton {
    /// Panics if `dim` exceeds [`MAX_HALTON_DIM`].
    pub fn new(dim: usize, seed: u64) -> Self {
        assert!(dim <= MAX_HALTON_DIM, "Halton dimension too large");
        let mut shift = [0.0; MAX_HALTON_DIM];
        if seed != 0 {
            let mut s = seed;
            for v in shift.iter_mut() {
                s = splitmix(s);
                *v = (s >> 11) as f64 / (1u64 << 53) as f64;
            }
        }
        Halton {
            dim,
            shift,
            // Index 0 is the origin for every base; skip it.
            index: 1,
        }
    }

    /// Writes the next point of `[0, 1)^dim` into `out`.
    pub fn next_into(&mut self, out: &mut [f64]) {
        for (d, o) in out.iter_mut().enumerate().take(self.dim) {
            let v = radical_inverse(self.index, PRIMES[d]) + self.shift[d];
            *o = if v >= 1.0 { v - 1.0 } else { v };
        }
        self.index += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unseeded_sequence_is_van_der_corput_in_base_two() {
        let mut h = Halton::new(2, 0);
        let mut p = [0.0; 2];
        h.next_into(&mut p);
        assert_eq!(p, [0.5, 1.0 / 3.0]);
        h.next_into(&mut p);
        assert_eq!(p, [0.25, 2.0 / 3.0]);
    }

    #[test]
    fn seeds_are_reproducible_and_distinct() {
        let take = |seed| {
            let mut h = Halton::new(3, seed);
            let mut p = [0.0; 3];
            h.next_into(&mut p);
            p
        };
        assert_eq!(take(7), take(7));
        assert_ne!(take(7), take(8));
        assert!(take(7).iter().all(|v| (0.0..1.0).contains(v)));
    }
}
