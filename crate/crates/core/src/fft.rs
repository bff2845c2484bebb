//! Discrete Fourier transforms of arbitrary length.
//!
//! Power-of-two lengths use an iterative radix-2 transform; other lengths go
//! through Bluestein's chirp-z algorithm on a padded power-of-two buffer.
//! Forward transforms use the `exp(-2 pi i k n / N)` kernel and are
//! unnormalized; [`Fft::inverse`] divides by `N`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::{C64, ZERO};

#[derive(Debug, Clone)]
pub struct Fft {
    len: usize,
    kind: Kind,
}

#[derive(Debug, Clone)]
enum Kind {
    Radix2 { twiddles: Vec<C64> },
    Bluestein(Bluestein),
}

#[derive(Debug, Clone)]
struct Bluestein {
    inner: Vec<C64>,
    inner_len: usize,
    chirp: Vec<C64>,
    kernel_hat: Vec<C64>,
}

impl Fft {
    pub fn new(len: usize) -> Self {
        assert!(len > 0, "FFT length must be positive");
        let kind = if len.is_power_of_two() {
            Kind::Radix2 {
                twiddles: radix2_twiddles(len),
            }
        } else {
            Kind::Bluestein(Bluestein::new(len))
        };
        Self { len, kind }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn forward(&self, data: &mut [C64]) {
        assert_eq!(data.len(), self.len);
        match &self.kind {
            Kind::Radix2 { twiddles } => radix2(data, twiddles, false),
            Kind::Bluestein(b) => b.run(data, false),
        }
    }

    pub fn inverse(&self, data: &mut [C64]) {
        assert_eq!(data.len(), self.len);
        match &self.kind {
            Kind::Radix2 { twiddles } => radix2(data, twiddles, true),
            Kind::Bluestein(b) => b.run(data, true),
        }
        let scale = 1.0 / self.len as f64;
        for z in data.iter_mut() {
            *z *= scale;
        }
    }
}

fn radix2_twiddles(len: usize) -> Vec<C64> {
    (0..len / 2)
        .map(|k| C64::from_polar(1.0, -2.0 * PI * k as f64 / len as f64))
        .collect()
}

fn radix2(data: &mut [C64], twiddles: &[C64], inverse: bool) {
    let n = data.len();
    if n <= 1 {
        return;
    }
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            data.swap(i, j);
        }
    }
    let mut size = 2;
    while size <= n {
        let half = size / 2;
        let stride = n / size;
        for start in (0..n).step_by(size) {
            for k in 0..half {
                let mut w = twiddles[k * stride];
                if inverse {
                    w = w.conj();
                }
                let a = data[start + k];
                let b = data[start + k + half] * w;
                data[start + k] = a + b;
                data[start + k + half] = a - b;
            }
        }
        size *= 2;
    }
}

impl Bluestein {
    fn new(len: usize) -> Self {
        let inner_len = (2 * len - 1).next_power_of_two();
        let inner = radix2_twiddles(inner_len);
        // chirp_n = exp(-i pi n^2 / N); n^2 reduced mod 2N keeps the phase exact
        let chirp: Vec<C64> = (0..len)
            .map(|n| {
                let sq = (n as u128 * n as u128) % (2 * len as u128);
                C64::from_polar(1.0, -PI * sq as f64 / len as f64)
            })
            .collect();
        let mut kernel = vec![ZERO; inner_len];
        kernel[0] = chirp[0].conj();
        for n in 1..len {
            kernel[n] = chirp[n].conj();
            kernel[inner_len - n] = chirp[n].conj();
        }
        radix2(&mut kernel, &inner, false);
        Self {
            inner,
            inner_len,
            chirp,
            kernel_hat: kernel,
        }
    }

    fn run(&self, data: &mut [C64], inverse: bool) {
        let n = data.len();
        let chirp = |k: usize| {
            if inverse {
                self.chirp[k].conj()
            } else {
                self.chirp[k]
            }
        };
        let mut buf = vec![ZERO; self.inner_len];
        for k in 0..n {
            buf[k] = data[k] * chirp(k);
        }
        radix2(&mut buf, &self.inner, false);
        for (b, kh) in buf.iter_mut().zip(&self.kernel_hat) {
            // the kernel is even in n, so the inverse kernel's DFT is the conjugate
            *b *= if inverse { kh.conj() } else { *kh };
        }
        radix2(&mut buf, &self.inner, true);
        let scale = 1.0 / self.inner_len as f64;
        for k in 0..n {
            data[k] = buf[k] * scale * chirp(k);
        }
    }
}

/// Signed integer wavenumber of DFT bin `k` in `{-N/2, ..., N/2 - 1}` order.
pub fn signed_index(k: usize, len: usize) -> i64 {
    if k < len.div_ceil(2) {
        k as i64
    } else {
        k as i64 - len as i64
    }
}

pub(crate) fn norm_sqr(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}
