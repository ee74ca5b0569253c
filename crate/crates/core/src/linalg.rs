//! Dense 2×2 complex matrices: the per-mode linear propagators.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Relative eigenvalue gap below which [`Mat2::expm`] leaves the closed form
/// for scaling-and-squaring.
pub const EIGEN_GAP_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[Complex64; 2]; 2]);

impl Mat2 {
    pub const ZERO: Mat2 = Mat2([[ZERO, ZERO], [ZERO, ZERO]]);
    pub const IDENTITY: Mat2 = Mat2([[ONE, ZERO], [ZERO, ONE]]);

    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Mat2([[a, b], [c, d]])
    }

    pub fn diag(a: Complex64, d: Complex64) -> Self {
        Mat2([[a, ZERO], [ZERO, d]])
    }

    pub fn scale(self, s: Complex64) -> Self {
        let m = self.0;
        Mat2([[m[0][0] * s, m[0][1] * s], [m[1][0] * s, m[1][1] * s]])
    }

    pub fn scale_re(self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    pub fn trace(&self) -> Complex64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn det(&self) -> Complex64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn apply(&self, x: [Complex64; 2]) -> [Complex64; 2] {
        let m = &self.0;
        [
            m[0][0] * x[0] + m[0][1] * x[1],
            m[1][0] * x[0] + m[1][1] * x[1],
        ]
    }

    pub fn inverse(&self) -> Option<Mat2> {
        let det = self.det();
        if det.norm() == 0.0 || !det.is_finite() {
            return None;
        }
        let m = &self.0;
        let inv = ONE / det;
        Some(Mat2([[m[1][1] * inv, -m[0][1] * inv], [-m[1][0] * inv, m[0][0] * inv]]))
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Mat2 {
        let m = &self.0;
        Mat2([[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]])
    }

    /// `xᴴ M y`
    pub fn form(&self, x: [Complex64; 2], y: [Complex64; 2]) -> Complex64 {
        let my = self.apply(y);
        x[0].conj() * my[0] + x[1].conj() * my[1]
    }

    /// Max-abs-row-sum norm.
    pub fn norm_inf(&self) -> f64 {
        let m = &self.0;
        (m[0][0].norm() + m[0][1].norm()).max(m[1][0].norm() + m[1][1].norm())
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|c| c.is_finite())
    }

    /// Eigenvalues `μ ± δ` with `μ = tr/2`, `δ² = ((a−d)/2)² + bc`.
    pub fn eigenvalues(&self) -> [Complex64; 2] {
        let (mu, delta) = self.center_and_delta();
        [mu + delta, mu - delta]
    }

    fn center_and_delta(&self) -> (Complex64, Complex64) {
        let m = &self.0;
        let mu = self.trace() * 0.5;
        let h = (m[0][0] - m[1][1]) * 0.5;
        (mu, (h * h + m[0][1] * m[1][0]).sqrt())
    }

    /// Matrix exponential.
    ///
    /// Diagonal input is exponentiated entrywise. Otherwise, with eigenvalues
    /// `μ ± δ`, `exp(M) = e^μ [cosh δ · I + (sinh δ / δ)(M − μI)]`, evaluated
    /// through `e^{μ±δ}` when `|Re δ|` is large so the scalar factors never
    /// overflow against each other. When the eigenvalue gap `2|δ|` falls below
    /// [`EIGEN_GAP_TOL`] relative to the spectrum, scaling-and-squaring with a
    /// degree-6 Padé approximant is used instead.
    pub fn expm(&self) -> Mat2 {
        let m = &self.0;
        if m[0][1] == ZERO && m[1][0] == ZERO {
            return Mat2::diag(m[0][0].exp(), m[1][1].exp());
        }
        let (mu, delta) = self.center_and_delta();
        let spread = mu.norm().max(delta.norm()).max(self.norm_inf());
        if 2.0 * delta.norm() < EIGEN_GAP_TOL * spread {
            return self.expm_pade();
        }
        let b = *self - Mat2::IDENTITY.scale(mu);
        let (cosh_part, sinhc_part) = if delta.re.abs() < 30.0 {
            let e = mu.exp();
            (e * delta.cosh(), e * delta.sinh() / delta)
        } else {
            let ep = (mu + delta).exp();
            let em = (mu - delta).exp();
            ((ep + em) * 0.5, (ep - em) / (delta * 2.0))
        };
        Mat2::IDENTITY.scale(cosh_part) + b.scale(sinhc_part)
    }

    /// Scaling-and-squaring with the diagonal [6/6] Padé approximant.
    pub fn expm_pade(&self) -> Mat2 {
        const C: [f64; 7] = [
            1.0,
            1.0 / 2.0,
            5.0 / 44.0,
            1.0 / 66.0,
            1.0 / 792.0,
            1.0 / 15840.0,
            1.0 / 665280.0,
        ];
        let norm = self.norm_inf();
        let s = if norm > 0.5 {
            (norm / 0.5).log2().ceil() as i32
        } else {
            0
        };
        let a = self.scale_re(0.5f64.powi(s));
        let a2 = a * a;
        let a4 = a2 * a2;
        let a6 = a4 * a2;
        let i = Mat2::IDENTITY;
        let u = a * (i.scale_re(C[1]) + a2.scale_re(C[3]) + a4.scale_re(C[5]));
        let v = i.scale_re(C[0]) + a2.scale_re(C[2]) + a4.scale_re(C[4]) + a6.scale_re(C[6]);
        let mut r = (v - u).inverse().expect("Padé denominator is nonsingular after scaling") * (v + u);
        for _ in 0..s {
            r = r * r;
        }
        r
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        let (a, b) = (self.0, o.0);
        Mat2([
            [a[0][0] + b[0][0], a[0][1] + b[0][1]],
            [a[1][0] + b[1][0], a[1][1] + b[1][1]],
        ])
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        self + o.scale_re(-1.0)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        let (a, b) = (self.0, o.0);
        Mat2([
            [
                a[0][0] * b[0][0] + a[0][1] * b[1][0],
                a[0][0] * b[0][1] + a[0][1] * b[1][1],
            ],
            [
                a[1][0] * b[0][0] + a[1][1] * b[1][0],
                a[1][0] * b[0][1] + a[1][1] * b[1][1],
            ],
        ])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cx(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn dist(a: &Mat2, b: &Mat2) -> f64 {
        (*a - *b).norm_inf()
    }

    /// Taylor series with many terms on a scaled-down argument; independent
    /// of both closed form and Padé.
    fn expm_taylor(m: &Mat2) -> Mat2 {
        let s = (m.norm_inf().max(1.0).log2().ceil() as i32) + 4;
        let a = m.scale_re(0.5f64.powi(s));
        let mut term = Mat2::IDENTITY;
        let mut sum = Mat2::IDENTITY;
        for k in 1..30 {
            term = (term * a).scale_re(1.0 / k as f64);
            sum = sum + term;
        }
        for _ in 0..s {
            sum = sum * sum;
        }
        sum
    }

    #[test]
    fn zero_matrix_exponentiates_to_identity() {
        assert_eq!(Mat2::ZERO.expm(), Mat2::IDENTITY);
    }

    #[test]
    fn diagonal_is_exact() {
        let m = Mat2::diag(cx(-3.0, 0.0), cx(-0.5, 0.0));
        let e = m.expm();
        assert_eq!(e.0[0][0].re, (-3.0f64).exp());
        assert_eq!(e.0[1][1].re, (-0.5f64).exp());
    }

    #[test]
    fn nilpotent_uses_pade_and_is_exact() {
        // eigenvalue gap zero: exp(N) = I + N
        let m = Mat2::new(cx(0.0, 0.0), cx(2.0, 1.0), cx(0.0, 0.0), cx(0.0, 0.0));
        let e = m.expm();
        let want = Mat2::IDENTITY + m;
        assert!(dist(&e, &want) < 1e-14);
    }

    #[test]
    fn rotation_generator() {
        // [[0, iθ], [iθ, 0]] -> [[cos θ, i sin θ], [i sin θ, cos θ]]
        let th = 0.7;
        let m = Mat2::new(cx(0.0, 0.0), cx(0.0, th), cx(0.0, th), cx(0.0, 0.0));
        let e = m.expm();
        let want = Mat2::new(cx(th.cos(), 0.0), cx(0.0, th.sin()), cx(0.0, th.sin()), cx(th.cos(), 0.0));
        assert!(dist(&e, &want) < 1e-15);
    }

    #[test]
    fn strongly_damped_split_spectrum_does_not_overflow() {
        let m = Mat2::new(cx(-1.0, 0.0), cx(0.0, 5.0), cx(0.0, 5.0), cx(-800.0, 0.0));
        let e = m.expm();
        assert!(e.is_finite());
        let t = expm_taylor(&m);
        assert!(dist(&e, &t) < 1e-12, "{e:?} vs {t:?}");
    }

    proptest! {
        #[test]
        fn closed_form_matches_pade_and_taylor(
            a in -5.0f64..0.5, b in -3.0f64..3.0, c in -3.0f64..3.0, d in -5.0f64..0.5,
            bi in -3.0f64..3.0, ci in -3.0f64..3.0,
        ) {
            let m = Mat2::new(cx(a, 0.0), cx(b, bi), cx(c, ci), cx(d, 0.0));
            let closed = m.expm();
            let pade = m.expm_pade();
            let taylor = expm_taylor(&m);
            let scale = taylor.norm_inf().max(1e-300);
            prop_assert!(dist(&closed, &taylor) <= 1e-12 * scale.max(1.0));
            prop_assert!(dist(&pade, &taylor) <= 1e-12 * scale.max(1.0));
        }

        #[test]
        fn exp_of_sum_of_commuting_halves(a in -4.0f64..0.0, b in -3.0f64..3.0, d in -4.0f64..0.0) {
            let m = Mat2::new(cx(a, 0.0), cx(0.0, b), cx(0.0, 1.3 * b), cx(d, 0.0));
            let half = m.scale_re(0.5).expm();
            prop_assert!(dist(&(half * half), &m.expm()) < 1e-13);
        }
    }
}
