use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::algebra::{AffineForm, Complex};

/// Which distribution a draw comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DrawKind {
    /// Uniform on the unit circle.
    UnitComplex,
    /// Standard complex normal (real and imaginary parts N(0, 1/2)).
    GaussianComplex,
}

/// Seeded, stream-addressed random source.
///
/// Backed by ChaCha20 with the stream id as the cipher nonce, so a draw is a
/// pure function of (seed, stream, draw index). Child streams for
/// independent sub-computations come from [`RandomSource::child`].
#[derive(Clone, Debug)]
pub struct RandomSource {
    seed: u64,
    stream: u64,
    rng: ChaCha20Rng,
}

impl RandomSource {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        RandomSource { seed, stream, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// A fresh source on a stream derived from this one and `label`.
    pub fn child(&self, label: u64) -> RandomSource {
        RandomSource::new(self.seed, mix(self.stream ^ mix(label.wrapping_add(0x9e37_79b9_7f4a_7c15))))
    }

    pub fn draw(&mut self, kind: DrawKind) -> Complex {
        match kind {
            DrawKind::UnitComplex => {
                let theta: f64 = self.rng.random::<f64>() * std::f64::consts::TAU;
                Complex::new(theta.cos(), theta.sin())
            }
            DrawKind::GaussianComplex => {
                let re: f64 = self.rng.sample(StandardNormal);
                let im: f64 = self.rng.sample(StandardNormal);
                Complex::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
            }
        }
    }

    pub fn unit_complex(&mut self) -> Complex {
        self.draw(DrawKind::UnitComplex)
    }

    pub fn gaussian(&mut self) -> Complex {
        self.draw(DrawKind::GaussianComplex)
    }

    pub fn gaussian_vec(&mut self, n: usize) -> Vec<Complex> {
        (0..n).map(|_| self.gaussian()).collect()
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Random affine form over `nvars` variables whose linear part is
    /// supported on `vars`.
    pub fn affine_form(&mut self, nvars: usize, vars: &[usize]) -> AffineForm {
        let mut coeffs = vec![Complex::new(0.0, 0.0); nvars];
        for &v in vars {
            coeffs[v] = self.gaussian();
        }
        let constant = self.gaussian();
        AffineForm::new(constant, coeffs)
    }
}

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
