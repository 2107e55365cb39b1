//! In-place radix-2 FFT, used to sample power series on circles.

use core::f64::consts::PI;
use num_complex::Complex64;

/// Forward DFT `X_k = Σ x_n e^{−2πi nk/N}`; `N` must be a power of two.
pub(crate) fn fft(data: &mut [Complex64]) {
    let n = data.len();
    assert!(n.is_power_of_two(), "fft length must be a power of two");
    let bits = n.trailing_zeros();
    if bits == 0 {
        return;
    }
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if i < j {
            data.swap(i, j);
        }
    }
    let mut len = 2;
    while len <= n {
        let angle = -2.0 * PI / len as f64;
        let step = Complex64::new(libm::cos(angle), libm::sin(angle));
        for start in (0..n).step_by(len) {
            let mut tw = Complex64::new(1.0, 0.0);
            for k in 0..len / 2 {
                let a = data[start + k];
                let b = data[start + k + len / 2] * tw;
                data[start + k] = a + b;
                data[start + k + len / 2] = a - b;
                // recompute periodically to stop twiddle drift
                tw = if (k + 1) % 64 == 0 {
                    let t = angle * (k + 1) as f64;
                    Complex64::new(libm::cos(t), libm::sin(t))
                } else {
                    tw * step
                };
            }
        }
        len <<= 1;
    }
}
