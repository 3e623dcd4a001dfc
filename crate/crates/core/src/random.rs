//! Random states and operators for inequality audits.
//!
//! Sampling always happens in `f64` and is converted to the target scalar, so
//! a given RNG stream yields the same draws regardless of precision.

use num_complex::Complex;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Poisson, StandardNormal};

use crate::linalg::{spectral_radius, ComplexMatrix, StateVector};
use crate::scalar::Real;

/// Deterministic RNG for `(seed, stream)`. Streams are independent.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn gaussian_complex<T: Real, R: Rng + ?Sized>(rng: &mut R) -> Complex<T> {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex::new(T::lit(re), T::lit(im))
}

/// Haar-random normalized ket.
pub fn random_state<T: Real, R: Rng + ?Sized>(dim: usize, rng: &mut R) -> StateVector<T> {
    loop {
        let amps: Vec<Complex<T>> = (0..dim).map(|_| gaussian_complex(rng)).collect();
        let v = StateVector::new(amps).expect("finite gaussian draws");
        if let Some(n) = v.normalized() {
            return n;
        }
    }
}

/// Uniform point on the unit sphere.
pub fn random_unit_vector<T: Real, R: Rng + ?Sized>(rng: &mut R) -> [T; 3] {
    loop {
        let v: [f64; 3] = [
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        ];
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > 1e-12 {
            return v.map(|x| T::lit(x / n));
        }
    }
}

/// `(G + G†)/2` with Gaussian `G`, rescaled to unit spectral radius.
pub fn random_hermitian<T: Real, R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix<T> {
    loop {
        let entries: Vec<Complex<T>> = (0..dim * dim).map(|_| gaussian_complex(rng)).collect();
        let g = ComplexMatrix::new(dim, entries).expect("finite gaussian draws");
        let h = (&g + &g.dagger()).scale_real(T::lit(0.5));
        let radius = spectral_radius(&h).expect("hermitian by construction");
        if radius > T::lit(1e-9) {
            let scaled = h.scale_real(radius.recip());
            // rounding can leave ~1 ulp of anti-Hermitian part
            return (&scaled + &scaled.dagger()).scale_real(T::lit(0.5));
        }
    }
}

/// Haar-random unitary: Gram–Schmidt on a complex Ginibre matrix. Gram–Schmidt
/// produces an `R` factor with positive diagonal, which fixes the column phases.
pub fn random_unitary<T: Real, R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix<T> {
    'retry: loop {
        let mut cols: Vec<Vec<Complex<T>>> = (0..dim)
            .map(|_| (0..dim).map(|_| gaussian_complex(rng)).collect())
            .collect();
        for j in 0..dim {
            // two passes of modified Gram–Schmidt for orthogonality at 1e-15
            for _ in 0..2 {
                for k in 0..j {
                    let proj = cols[k]
                        .iter()
                        .zip(&cols[j])
                        .fold(Complex::new(T::zero(), T::zero()), |acc, (q, v)| acc + q.conj() * v);
                    let qk = cols[k].clone();
                    for (v, q) in cols[j].iter_mut().zip(&qk) {
                        *v = *v - proj * q;
                    }
                }
            }
            let n = cols[j].iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
            if n < T::lit(1e-9) {
                continue 'retry;
            }
            for v in cols[j].iter_mut() {
                *v = *v / n;
            }
        }
        return ComplexMatrix::from_fn(dim, |r, c| cols[c][r]);
    }
}

/// One multinomial draw of `n` trials over `probs` (need not be normalized),
/// by sequential conditional binomials.
pub fn multinomial<R: Rng + ?Sized>(n: u64, probs: &[f64], rng: &mut R) -> Vec<u64> {
    let probs: Vec<f64> = probs.iter().map(|p| p.max(0.0)).collect();
    // suffix sums, so a cell followed only by empty cells gets q = 1 exactly
    let mut tail = vec![0.0; probs.len() + 1];
    for i in (0..probs.len()).rev() {
        tail[i] = tail[i + 1] + probs[i];
    }
    let mut remaining = n;
    let mut out = Vec::with_capacity(probs.len());
    for (i, &p) in probs.iter().enumerate() {
        let k = if i + 1 == probs.len() {
            remaining
        } else if remaining == 0 || p <= 0.0 {
            0
        } else {
            let q = (p / tail[i]).clamp(0.0, 1.0);
            rng.sample(Binomial::new(remaining, q).expect("q in [0, 1]"))
        };
        out.push(k);
        remaining -= k;
    }
    out
}

/// Independent Poisson counts with means `mean_total · p_i`.
pub fn poisson_counts<R: Rng + ?Sized>(mean_total: f64, probs: &[f64], rng: &mut R) -> Vec<u64> {
    probs
        .iter()
        .map(|&p| {
            let lambda = mean_total * p.max(0.0);
            if lambda > 0.0 {
                rng.sample(Poisson::new(lambda).expect("positive finite mean")) as u64
            } else {
                0
            }
        })
        .collect()
}
