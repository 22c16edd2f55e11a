//! Martingale-restoring drifts under the terminal measure.
//!
//! The drift of rate `j` at one grid step is
//!
//! ```text
//! b_j = -(1/lambda_j) * log E[ exp(lambda_j X) * W(X) ],
//! W(x) = prod_{k=j+1..n} ( ell_k * (exp(lambda_k (x + b_k)) - 1) + 1 ),
//! ```
//!
//! where the expectation runs over the terminal-measure law of the increment
//! and `W` is the one-step density factor that moves the conditioning from
//! the terminal measure to the forward measure of tenor `j + 1`. The factors
//! need the drifts of all higher rates, so drifts are computed backward,
//! `j = n, n-1, ...`; with that ordering `E[W] = 1` and each rate's
//! exponential increment has conditional mean one under its own measure.
//!
//! For atomic increments the expectation is a finite sum over atoms with the
//! product form of `W` (linear in the number of factors). For Gaussian
//! increments the product is expanded over subsets of the factor set, which
//! turns the integrand into a finite combination of exponentials whose
//! Gaussian expectations are closed-form; the same expansion doubles as an
//! independent oracle for the product form.

use crate::driver::{DriverKind, DriverSpec};
use crate::error::{Error, Result};

/// Largest factor count accepted by the subset expansion (2^20 terms).
pub const MAX_EXPANSION_FACTORS: usize = 20;

/// One factor of the measure-change weight: the state-measurable `ell` of a
/// higher rate, its vol loading at this step, and its already-computed drift.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompensatorFactor {
    pub ell: f64,
    pub lambda: f64,
    pub drift: f64,
}

/// The factors for rates `k = j+1..=n`, validated once per construction.
///
/// `ell = 0` is accepted (a vanished rate contributes a unit factor); values
/// at or above 1 cannot arise from positive rates and are rejected.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CompensatorContext {
    factors: Vec<CompensatorFactor>,
}

impl CompensatorContext {
    pub fn new(factors: Vec<CompensatorFactor>) -> Result<Self> {
        for (idx, f) in factors.iter().enumerate() {
            if !(0.0..1.0).contains(&f.ell) || !f.ell.is_finite() {
                return Err(Error::Domain(format!(
                    "compensator factor {idx}: ell must lie in [0, 1), got {}",
                    f.ell
                )));
            }
            if !f.lambda.is_finite() || !f.drift.is_finite() {
                return Err(Error::Domain(format!(
                    "compensator factor {idx}: non-finite lambda or drift"
                )));
            }
        }
        Ok(Self { factors })
    }

    /// Terminal measure: no reweighting at all.
    pub fn empty() -> Self {
        Self {
            factors: Vec::new(),
        }
    }

    pub fn factors(&self) -> &[CompensatorFactor] {
        &self.factors
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    /// Product form of the one-step density factor at increment `x`:
    /// `prod_k ( ell_k (e^{lambda_k (x + b_k)} - 1) + 1 )`. Strictly positive
    /// because every `ell_k` lies in `[0, 1)`.
    pub fn weight(&self, x: f64) -> f64 {
        self.factors
            .iter()
            .map(|f| f.ell * ((f.lambda * (x + f.drift)).exp() - 1.0) + 1.0)
            .product()
    }

    /// The same weight evaluated by expanding the product over all subsets of
    /// the factor set: `sum_S prod_{k in S} ell_k e^{lambda_k (x + b_k)} *
    /// prod_{k not in S} (1 - ell_k)`. Exponentially sized; kept as the
    /// independent route the product form is checked against.
    pub fn subset_expansion_weight(&self, x: f64) -> Result<f64> {
        let q = self.factors.len();
        if q > MAX_EXPANSION_FACTORS {
            return Err(Error::TooLarge(format!(
                "subset expansion over {q} factors needs 2^{q} terms (limit 2^{MAX_EXPANSION_FACTORS})"
            )));
        }
        let mut total = 0.0;
        for mask in 0u64..(1u64 << q) {
            let mut term = 1.0;
            for (k, f) in self.factors.iter().enumerate() {
                if mask & (1 << k) != 0 {
                    term *= f.ell * (f.lambda * (x + f.drift)).exp();
                } else {
                    term *= 1.0 - f.ell;
                }
            }
            total += term;
        }
        Ok(total)
    }

    /// Expand `prod_k (ell_k e^{lambda_k (x + b_k)} + (1 - ell_k))` into a
    /// list of `(exponent, coefficient)` pairs so that the weight equals
    /// `sum c * e^{u x}`. Deterministic order: factor `k` doubles the list,
    /// "absent" halves first.
    fn exponential_terms(&self) -> Result<Vec<(f64, f64)>> {
        let q = self.factors.len();
        if q > MAX_EXPANSION_FACTORS {
            return Err(Error::TooLarge(format!(
                "subset expansion over {q} factors needs 2^{q} terms (limit 2^{MAX_EXPANSION_FACTORS})"
            )));
        }
        let mut terms = vec![(0.0f64, 1.0f64)];
        for f in &self.factors {
            let present = f.ell * (f.lambda * f.drift).exp();
            let absent = 1.0 - f.ell;
            let mut next = Vec::with_capacity(terms.len() * 2);
            for &(u, c) in &terms {
                next.push((u, c * absent));
            }
            for &(u, c) in &terms {
                next.push((u + f.lambda, c * present));
            }
            terms = next;
        }
        Ok(terms)
    }
}

fn require_positive_lambda(lambda: f64) -> Result<()> {
    if lambda <= 0.0 || !lambda.is_finite() {
        return Err(Error::Domain(format!(
            "drift needs a strictly positive vol loading (the definition divides by it), got {lambda}"
        )));
    }
    Ok(())
}

/// Drift of a rate with vol loading `lambda` driven by an atomic increment:
/// the expectation is the exact sum over atoms, weighted by the product-form
/// density factor. With an empty context this reduces to
/// `-(1/lambda) log E[e^{lambda X}]`.
pub fn drift_atomic(driver: &DriverSpec, lambda: f64, ctx: &CompensatorContext) -> Result<f64> {
    require_positive_lambda(lambda)?;
    let atoms = driver
        .atoms()
        .ok_or_else(|| Error::Invalid("drift_atomic needs an atomic driver".into()))?;
    let mut expectation = 0.0;
    for atom in atoms {
        expectation += atom.prob * (lambda * atom.value).exp() * ctx.weight(atom.value);
    }
    Ok(-expectation.ln() / lambda)
}

/// Drift of a rate with vol loading `lambda` driven by a centered Gaussian
/// increment with the given variance. The weight is expanded into
/// exponentials, whose Gaussian expectations are closed-form:
/// `E[e^{u X}] = e^{u^2 v / 2}`, so the result is exact (no sampling, no
/// frozen coefficients). Cost is `2^q` terms for `q` context factors.
pub fn drift_gaussian(variance: f64, lambda: f64, ctx: &CompensatorContext) -> Result<f64> {
    require_positive_lambda(lambda)?;
    if variance <= 0.0 || !variance.is_finite() {
        return Err(Error::Domain(format!(
            "gaussian variance must be > 0, got {variance}"
        )));
    }
    let mut expectation = 0.0;
    for (u, c) in ctx.exponential_terms()? {
        let e = lambda + u;
        expectation += c * (0.5 * e * e * variance).exp();
    }
    Ok(-expectation.ln() / lambda)
}

/// Dispatch on the driver family.
pub fn drift(driver: &DriverSpec, lambda: f64, ctx: &CompensatorContext) -> Result<f64> {
    match driver.kind() {
        DriverKind::Atomic(_) => drift_atomic(driver, lambda, ctx),
        DriverKind::Gaussian { variance } => drift_gaussian(*variance, lambda, ctx),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::driver::Atom;
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn factor(ell: f64, lambda: f64, drift: f64) -> CompensatorFactor {
        CompensatorFactor { ell, lambda, drift }
    }

    /// Adaptive Simpson quadrature of `f` against the centered normal density
    /// with variance `v`; the independent route for Gaussian expectations.
    fn gaussian_quadrature<F: Fn(f64) -> f64>(f: F, v: f64) -> f64 {
        let sd = v.sqrt();
        let (a, b) = (-14.0 * sd, 14.0 * sd);
        let density =
            |x: f64| (-(x * x) / (2.0 * v)).exp() / (2.0 * std::f64::consts::PI * v).sqrt();
        let g = |x: f64| f(x) * density(x);
        let mut intervals = 1usize << 6;
        let mut prev = f64::NAN;
        loop {
            let h = (b - a) / intervals as f64;
            let mut sum = g(a) + g(b);
            for i in 1..intervals {
                let x = a + i as f64 * h;
                sum += if i % 2 == 0 { 2.0 * g(x) } else { 4.0 * g(x) };
            }
            let est = sum * h / 3.0;
            if (est - prev).abs() <= 1e-13 * est.abs().max(1.0) || intervals >= 1 << 22 {
                return est;
            }
            prev = est;
            intervals *= 2;
        }
    }

    #[test]
    fn empty_context_weight_is_one() {
        let ctx = CompensatorContext::empty();
        for x in [-3.0, 0.0, 5.0] {
            assert_eq!(ctx.weight(x), 1.0);
            assert_eq!(ctx.subset_expansion_weight(x).unwrap(), 1.0);
        }
    }

    #[test]
    fn zero_ell_factors_are_inert() {
        let ctx =
            CompensatorContext::new(vec![factor(0.0, 0.3, -0.1), factor(0.0, 0.2, 0.4)]).unwrap();
        for x in [-2.0, 0.0, 1.7] {
            assert_eq!(ctx.weight(x), 1.0);
        }
    }

    #[test]
    fn single_factor_weight_matches_hand_arithmetic() {
        // ell = 0.04/1.04, lambda = 0.16, drift = 0, x = 1
        let ell = 0.0384615;
        let ctx = CompensatorContext::new(vec![factor(ell, 0.16, 0.0)]).unwrap();
        let expected = ell * ((0.16f64).exp() - 1.0) + 1.0;
        assert_relative_eq!(ctx.weight(1.0), expected, max_relative = 1e-15);
        assert!((ctx.weight(1.0) - 1.006674).abs() < 1e-6);
        // x = -drift gives a unit factor
        let ctx = CompensatorContext::new(vec![factor(0.3, 0.5, -0.25)]).unwrap();
        assert_eq!(ctx.weight(0.25), 1.0);
    }

    #[test]
    fn ell_outside_unit_interval_rejected() {
        assert!(CompensatorContext::new(vec![factor(1.0, 0.2, 0.0)]).is_err());
        assert!(CompensatorContext::new(vec![factor(-0.01, 0.2, 0.0)]).is_err());
    }

    #[test]
    fn expansion_size_limit_enforced() {
        let ctx = CompensatorContext::new(vec![factor(0.1, 0.2, 0.0); MAX_EXPANSION_FACTORS + 1])
            .unwrap();
        assert!(matches!(
            ctx.subset_expansion_weight(0.0),
            Err(Error::TooLarge(_))
        ));
        assert!(matches!(
            drift_gaussian(1.0, 0.2, &ctx),
            Err(Error::TooLarge(_))
        ));
    }

    #[test]
    fn subset_expansion_matches_product_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..10_000 {
            let q = rng.random_range(0..=5);
            let factors: Vec<_> = (0..q)
                .map(|_| {
                    factor(
                        rng.random_range(0.0..0.9),
                        rng.random_range(0.01..0.8),
                        rng.random_range(-0.5..0.5),
                    )
                })
                .collect();
            let ctx = CompensatorContext::new(factors).unwrap();
            let x = rng.random_range(-3.0..3.0);
            let product = ctx.weight(x);
            let expansion = ctx.subset_expansion_weight(x).unwrap();
            assert!(
                (product - expansion).abs() <= 1e-12 * product.abs(),
                "q={q} x={x} product={product} expansion={expansion}"
            );
        }
    }

    #[test]
    fn terminal_rate_drift_reduces_to_log_mgf() {
        // Bernoulli +-1, lambda = 0.16: b = -ln(cosh 0.16)/0.16
        let d = DriverSpec::bernoulli();
        let b = drift_atomic(&d, 0.16, &CompensatorContext::empty()).unwrap();
        // the two-atom sum is the defining route; cosh is a convenience form
        let two_term = 0.5 * (0.16f64).exp() + 0.5 * (-0.16f64).exp();
        assert_relative_eq!(b, -two_term.ln() / 0.16, max_relative = 1e-15);
        assert_relative_eq!(b, -(0.16f64.cosh().ln()) / 0.16, max_relative = 1e-13);
        assert!((b - -0.0796).abs() < 1e-4);

        // the martingale identity mgf(u) * e^{u b} = 1 for any loading
        for u in [0.05, 0.26, 1.1] {
            let b = drift_atomic(&d, u, &CompensatorContext::empty()).unwrap();
            assert_relative_eq!(d.mgf(u).unwrap() * (u * b).exp(), 1.0, max_relative = 1e-14);
        }
    }

    #[test]
    fn gaussian_terminal_drift_is_half_lambda_v() {
        let b = drift_gaussian(1.0, 0.26, &CompensatorContext::empty()).unwrap();
        assert_relative_eq!(b, -0.13, max_relative = 1e-14);
        let b = drift_gaussian(0.37, 0.4, &CompensatorContext::empty()).unwrap();
        assert_relative_eq!(b, -0.5 * 0.4 * 0.37, max_relative = 1e-13);
    }

    #[test]
    fn zero_lambda_rejected() {
        let d = DriverSpec::bernoulli();
        assert!(drift_atomic(&d, 0.0, &CompensatorContext::empty()).is_err());
        assert!(drift_gaussian(1.0, 0.0, &CompensatorContext::empty()).is_err());
    }

    #[test]
    fn one_higher_factor_matches_bruteforce_atom_sum() {
        // paper-style numbers: ell from L = 0.04, lambda row values 0.16/0.18
        let d = DriverSpec::bernoulli();
        let b_term = drift_atomic(&d, 0.16, &CompensatorContext::empty()).unwrap();
        let ell = 0.04 / 1.04;
        let ctx = CompensatorContext::new(vec![factor(ell, 0.16, b_term)]).unwrap();
        let b = drift_atomic(&d, 0.18, &ctx).unwrap();

        let brute: f64 = [(1.0, 0.5), (-1.0, 0.5)]
            .iter()
            .map(|&(x, p): &(f64, f64)| {
                p * (0.18 * x).exp() * (ell * ((0.16 * (x + b_term)).exp() - 1.0) + 1.0)
            })
            .sum();
        assert_relative_eq!(b, -brute.ln() / 0.18, max_relative = 1e-14);
    }

    /// Backward-recursed drifts restore the martingale property: with the
    /// weights of the computed context, E[e^{lambda (X + b)} W] / E[W] = 1,
    /// and E[W] itself is 1.
    fn recurse_drifts(
        driver: &DriverSpec,
        ells: &[f64],
        lambdas: &[f64],
    ) -> (Vec<f64>, Vec<CompensatorContext>) {
        let n = ells.len();
        let mut drifts = vec![0.0; n];
        let mut ctxs = Vec::new();
        for j in (0..n).rev() {
            let factors: Vec<_> = (j + 1..n)
                .map(|k| factor(ells[k], lambdas[k], drifts[k]))
                .collect();
            let ctx = CompensatorContext::new(factors).unwrap();
            drifts[j] = drift(driver, lambdas[j], &ctx).unwrap();
            ctxs.push(ctx);
        }
        ctxs.reverse();
        (drifts, ctxs)
    }

    #[test]
    fn atomic_martingale_restoration_to_1e12() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..200 {
            let n = rng.random_range(1..=8);
            let ells: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..0.4)).collect();
            let lambdas: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..0.6)).collect();
            let three_atoms = DriverSpec::atomic(vec![
                Atom {
                    value: 1.2,
                    prob: 0.3,
                },
                Atom {
                    value: -0.4,
                    prob: 0.5,
                },
                Atom {
                    value: -0.8,
                    prob: 0.2,
                },
            ])
            .unwrap();
            for d in [DriverSpec::bernoulli(), three_atoms] {
                let (drifts, ctxs) = recurse_drifts(&d, &ells, &lambdas);
                for j in 0..n {
                    let atoms = d.atoms().unwrap();
                    let num: f64 = atoms
                        .iter()
                        .map(|a| {
                            a.prob
                                * (lambdas[j] * (a.value + drifts[j])).exp()
                                * ctxs[j].weight(a.value)
                        })
                        .sum();
                    let den: f64 = atoms.iter().map(|a| a.prob * ctxs[j].weight(a.value)).sum();
                    assert!(
                        (num / den - 1.0).abs() <= 1e-12,
                        "j={j} ratio={}",
                        num / den
                    );
                    assert!((den - 1.0).abs() <= 1e-12, "E[W]={den}");
                }
            }
        }
    }

    #[test]
    fn gaussian_drift_matches_quadrature_oracle() {
        // 3 higher factors with random ells, checked against adaptive Simpson
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..5 {
            let v = rng.random_range(0.3..1.5);
            let lambdas: Vec<f64> = (0..4).map(|_| rng.random_range(0.1..0.5)).collect();
            let ells: Vec<f64> = (0..4).map(|_| rng.random_range(0.0..0.3)).collect();
            let (drifts, ctxs) = {
                let d = DriverSpec::gaussian(v).unwrap();
                let n = 4;
                let mut drifts = vec![0.0; n];
                let mut ctxs = Vec::new();
                for j in (0..n).rev() {
                    let factors: Vec<_> = (j + 1..n)
                        .map(|k| factor(ells[k], lambdas[k], drifts[k]))
                        .collect();
                    let ctx = CompensatorContext::new(factors).unwrap();
                    drifts[j] = drift(&d, lambdas[j], &ctx).unwrap();
                    ctxs.push(ctx);
                }
                ctxs.reverse();
                (drifts, ctxs)
            };
            // lowest rate has all 3 higher factors
            let expectation =
                gaussian_quadrature(|x| (lambdas[0] * x).exp() * ctxs[0].weight(x), v);
            let oracle = -expectation.ln() / lambdas[0];
            assert!(
                (drifts[0] - oracle).abs() <= 1e-8,
                "drift={} oracle={oracle}",
                drifts[0]
            );
        }
    }

    #[test]
    fn gaussian_martingale_restoration_vs_quadrature() {
        let v = 1.0;
        let d = DriverSpec::gaussian(v).unwrap();
        let lambdas = [0.26, 0.22, 0.18];
        let ells = [0.03, 0.035, 0.04];
        let n = 3;
        let mut drifts = vec![0.0; n];
        let mut ctxs = Vec::new();
        for j in (0..n).rev() {
            let factors: Vec<_> = (j + 1..n)
                .map(|k| factor(ells[k], lambdas[k], drifts[k]))
                .collect();
            let ctx = CompensatorContext::new(factors).unwrap();
            drifts[j] = drift(&d, lambdas[j], &ctx).unwrap();
            ctxs.push(ctx);
        }
        ctxs.reverse();
        for j in 0..n {
            let num = gaussian_quadrature(
                |x| (lambdas[j] * (x + drifts[j])).exp() * ctxs[j].weight(x),
                v,
            );
            let den = gaussian_quadrature(|x| ctxs[j].weight(x), v);
            assert!((num / den - 1.0).abs() <= 1e-8, "j={j}: {}", num / den);
            assert!((den - 1.0).abs() <= 1e-8, "E[W]={den}");
        }
    }

    #[test]
    fn perturbing_a_higher_drift_breaks_the_martingale_check() {
        let d = DriverSpec::bernoulli();
        let ells = [0.1, 0.2, 0.3];
        let lambdas = [0.3, 0.25, 0.2];
        let (drifts, _) = recurse_drifts(&d, &ells, &lambdas);

        // rebuild rate 0's context with a perturbed higher drift: the ratio
        // must leave the 1e-12 band (ordering dependence is real)
        let mut wrong = drifts.clone();
        wrong[2] += 1e-3;
        let ctx = CompensatorContext::new(vec![
            factor(ells[1], lambdas[1], wrong[1]),
            factor(ells[2], lambdas[2], wrong[2]),
        ])
        .unwrap();
        let atoms = d.atoms().unwrap();
        let num: f64 = atoms
            .iter()
            .map(|a| a.prob * (lambdas[0] * (a.value + drifts[0])).exp() * ctx.weight(a.value))
            .sum();
        let den: f64 = atoms.iter().map(|a| a.prob * ctx.weight(a.value)).sum();
        assert!(
            (num / den - 1.0).abs() > 1e-9,
            "perturbed ordering still passed: {}",
            num / den
        );
    }
}
