use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lme::{full_mask, mask_subsets, LmeCoeffMatrix, LmesSpec};

/// Result of one color subprotocol on two identical copies.
#[derive(Debug, Clone, PartialEq)]
pub struct PurifyOutcome {
    /// Normalized output coefficients.
    pub output: LmeCoeffMatrix,
    /// Trace of the unnormalized image: the probability that `k_A = l_A`
    /// across the two copies. GHZ-merge success factors are not included.
    pub parity_success_prob: f64,
}

const TRACE_TOL: f64 = 1e-9;

/// Apply the subprotocol purifying `color` to two copies of `lambda`:
///
/// `λ'[k_A,k_Ā; k'_A,k'_Ā] = Σ_{l,l'} λ[k_A,l; k'_A,l'] λ[k_A,l⊕k_Ā; k'_A,l'⊕k'_Ā]`
///
/// with `l, l'` ranging over sub-indices on the complement of the color.
pub fn purify_color(lambda: &LmeCoeffMatrix, spec: &LmesSpec, color: usize) -> Result<PurifyOutcome> {
    spec.require_regular()?;
    let a_mask = spec.color_mask(color)?;
    if lambda.n() != spec.n() {
        return Err(Error::DimensionMismatch {
            expected: spec.n(),
            actual: lambda.n(),
        });
    }
    let t = lambda.trace();
    if (t - 1.0).abs() > TRACE_TOL {
        return Err(Error::InvalidParameter {
            what: "input trace",
            value: t,
            range: "1 ± 1e-9".into(),
        });
    }
    let raw = purify_unnormalized(lambda, a_mask, full_mask(spec.n()) & !a_mask);
    let trace: f64 = raw.diagonal().iter().map(|z| z.re).sum();
    if trace.abs() < 1e-14 {
        return Err(Error::ZeroTrace);
    }
    Ok(PurifyOutcome {
        output: LmeCoeffMatrix::from_hermitian(spec.n(), raw.unscale(trace)),
        parity_success_prob: trace,
    })
}

/// For each pair `(k_A, k'_A)` the image block is the 2D XOR autoconvolution
/// of the input block over the complement indices, evaluated with a
/// Walsh-Hadamard transform.
fn purify_unnormalized(lambda: &LmeCoeffMatrix, a_mask: usize, rest_mask: usize) -> crate::linalg::CMatrix {
    let d = lambda.dim();
    let a_subs = mask_subsets(a_mask);
    let r_subs = mask_subsets(rest_mask);
    let nb = r_subs.len();
    let src = lambda.matrix();
    let mut out = crate::linalg::CMatrix::zeros(d, d);
    let mut block = vec![Complex64::new(0.0, 0.0); nb * nb];
    let inv = 1.0 / (nb * nb) as f64;
    for &ka in &a_subs {
        for &kpa in &a_subs {
            for x in 0..nb {
                for y in 0..nb {
                    block[x * nb + y] = src[(ka | r_subs[x], kpa | r_subs[y])];
                }
            }
            wht_2d(&mut block, nb);
            for v in block.iter_mut() {
                *v = *v * *v;
            }
            wht_2d(&mut block, nb);
            for x in 0..nb {
                for y in 0..nb {
                    out[(ka | r_subs[x], kpa | r_subs[y])] = block[x * nb + y] * inv;
                }
            }
        }
    }
    out
}

fn wht(data: &mut [Complex64]) {
    let n = data.len();
    let mut h = 1;
    while h < n {
        for start in (0..n).step_by(2 * h) {
            for i in start..start + h {
                let (a, b) = (data[i], data[i + h]);
                data[i] = a + b;
                data[i + h] = a - b;
            }
        }
        h *= 2;
    }
}

fn wht_2d(block: &mut [Complex64], nb: usize) {
    for row in block.chunks_mut(nb) {
        wht(row);
    }
    let mut col = vec![Complex64::new(0.0, 0.0); nb];
    for y in 0..nb {
        for x in 0..nb {
            col[x] = block[x * nb + y];
        }
        wht(&mut col);
        for x in 0..nb {
            block[x * nb + y] = col[x];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;
    use crate::noise::white_noise;
    use crate::random;
    use rand::SeedableRng;

    fn u123() -> LmesSpec {
        LmesSpec::new(3, vec![vec![1, 2, 3]], vec![vec![1], vec![2], vec![3]]).unwrap()
    }

    /// Explicit quadruple sum of the two-copy map.
    fn summed_map(lambda: &LmeCoeffMatrix, a_mask: usize) -> crate::linalg::CMatrix {
        let d = lambda.dim();
        let rest = (d - 1) & !a_mask;
        let subs = mask_subsets(rest);
        let m = lambda.matrix();
        crate::linalg::CMatrix::from_fn(d, d, |k, kp| {
            let (ka, kr) = (k & a_mask, k & rest);
            let (kpa, kpr) = (kp & a_mask, kp & rest);
            let mut s = Complex64::new(0.0, 0.0);
            for &l in &subs {
                for &lp in &subs {
                    s += m[(ka | l, kpa | lp)] * m[(ka | (l ^ kr), kpa | (lp ^ kpr))];
                }
            }
            s
        })
    }

    #[test]
    fn target_is_fixed_point() {
        let spec = u123();
        for color in 0..3 {
            let out = purify_color(&LmeCoeffMatrix::target(3), &spec, color).unwrap();
            assert!(max_abs_diff(out.output.matrix(), LmeCoeffMatrix::target(3).matrix()) < 1e-15);
            assert!((out.parity_success_prob - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn maximally_mixed_is_invariant_with_half_success() {
        let spec = u123();
        let mixed = LmeCoeffMatrix::diagonal(3, &[0.125; 8]).unwrap();
        let out = purify_color(&mixed, &spec, 0).unwrap();
        assert!(max_abs_diff(out.output.matrix(), mixed.matrix()) < 1e-15);
        assert!((out.parity_success_prob - 0.5).abs() < 1e-15);
    }

    #[test]
    fn white_noise_single_step_matches_explicit_sum() {
        let spec = u123();
        let lam = white_noise(&spec, 0.6).unwrap();
        let out = purify_color(&lam, &spec, 0).unwrap();
        // diagonal recurrence evaluated by hand: kA = 0 block
        let w = lam.diagonal_weights();
        let mut expect = [0.0; 8];
        for (k, e) in expect.iter_mut().enumerate() {
            let (ka, kr) = (k & 1, k & 6);
            *e = [0usize, 2, 4, 6].iter().map(|&l| w[ka | l] * w[ka | (l ^ kr)]).sum();
        }
        let t: f64 = expect.iter().sum();
        for (k, e) in expect.iter().enumerate() {
            assert!((out.output.entry(k, k).re - e / t).abs() < 1e-14);
        }
        assert!((out.parity_success_prob - t).abs() < 1e-14);
        assert!(out.output.is_diagonal(0.0));
    }

    #[test]
    fn general_input_matches_explicit_sum() {
        let spec = LmesSpec::new(
            4,
            vec![vec![1, 2, 3], vec![2, 3, 4]],
            vec![vec![1, 4], vec![2], vec![3]],
        )
        .unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        for _ in 0..3 {
            let lam = random::random_lme_coeffs(4, &mut rng);
            for color in 0..3 {
                let mask = spec.color_mask(color).unwrap();
                let raw = summed_map(&lam, mask);
                let t: f64 = raw.diagonal().iter().map(|z| z.re).sum();
                let out = purify_color(&lam, &spec, color).unwrap();
                assert!(max_abs_diff(out.output.matrix(), &raw.unscale(t)) < 1e-13);
                assert!((out.parity_success_prob - t).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn diagonal_success_is_marginal_collision_probability() {
        let spec = u123();
        let w = [0.4, 0.1, 0.05, 0.15, 0.1, 0.05, 0.1, 0.05];
        let lam = LmeCoeffMatrix::diagonal(3, &w).unwrap();
        let mask = spec.color_mask(1).unwrap();
        let mut marginal = [0.0; 2];
        for (k, &x) in w.iter().enumerate() {
            marginal[usize::from(k & mask != 0)] += x;
        }
        let out = purify_color(&lam, &spec, 1).unwrap();
        let expect = marginal[0] * marginal[0] + marginal[1] * marginal[1];
        assert!((out.parity_success_prob - expect).abs() < 1e-15);
    }

    #[test]
    fn error_paths() {
        let spec = u123();
        let lam = LmeCoeffMatrix::target(3);
        assert!(matches!(purify_color(&lam, &spec, 3), Err(Error::UnknownColor { .. })));
        let nonregular = LmesSpec::new(
            3,
            vec![vec![1, 2, 3], vec![2, 3]],
            vec![vec![1], vec![2], vec![3]],
        )
        .unwrap();
        assert!(matches!(purify_color(&lam, &nonregular, 0), Err(Error::NonRegular(_))));
        let half = LmeCoeffMatrix::diagonal(3, &[0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(purify_color(&half, &spec, 0).is_err());
    }
}
