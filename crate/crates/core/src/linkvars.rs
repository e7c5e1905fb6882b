//! Shared variable layout for precoder optimisation programs.
//!
//! Every conic formulation in this crate optimises the same unknowns: one
//! complex weight vector per active `(bs, user)` link, embedded as
//! interleaved real/imaginary variables. This module owns that embedding and
//! the affine rows that recur across formulations — received-signal rows,
//! per-antenna power cones and the mode-dependent interference rows.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::conic::{ComplexEmbedding, ConicProgram, LinExpr};
use crate::feedback::MaskedCsi;
use crate::metrics::{Precoder, SinrMode};

/// Adds `scale * other` into `expr`.
pub(crate) fn add_scaled(expr: &mut LinExpr, other: &LinExpr, scale: f64) {
    for &(var, coef) in &other.terms {
        expr.add_term(var, scale * coef);
    }
    expr.add_constant(scale * other.constant);
}

#[derive(Debug, Clone)]
pub(crate) struct LinkVars {
    links: Vec<(usize, usize)>,
    index: BTreeMap<(usize, usize), usize>,
    n_t: usize,
    embedding: ComplexEmbedding,
}

impl LinkVars {
    /// Allocates real variables for every active link of the cooperation map.
    pub fn allocate(prog: &mut ConicProgram, masked: &MaskedCsi) -> Self {
        let links = masked.coop.links();
        let index = links
            .iter()
            .enumerate()
            .map(|(i, &link)| (link, i))
            .collect();
        let embedding = ComplexEmbedding::allocate(prog, links.len() * masked.n_t);
        LinkVars {
            links,
            index,
            n_t: masked.n_t,
            embedding,
        }
    }

    fn slot(&self, bs: usize, user: usize, antenna: usize) -> usize {
        self.index[&(bs, user)] * self.n_t + antenna
    }

    pub fn re(&self, bs: usize, user: usize, antenna: usize) -> usize {
        self.embedding.re(self.slot(bs, user, antenna))
    }

    pub fn im(&self, bs: usize, user: usize, antenna: usize) -> usize {
        self.embedding.im(self.slot(bs, user, antenna))
    }

    /// Accumulates `scale * h w_{bs,user}` into `(re, im)` rows.
    pub fn accumulate_product(
        &self,
        re: &mut LinExpr,
        im: &mut LinExpr,
        h: &[Complex64],
        bs: usize,
        user: usize,
        scale: f64,
    ) {
        for (k, hk) in h.iter().enumerate() {
            let wr = self.re(bs, user, k);
            let wi = self.im(bs, user, k);
            // h w = (hr wr - hi wi) + j (hr wi + hi wr)
            re.add_term(wr, scale * hk.re);
            re.add_term(wi, -scale * hk.im);
            im.add_term(wi, scale * hk.re);
            im.add_term(wr, scale * hk.im);
        }
    }

    /// Rows for the real and imaginary parts of the intended signal
    /// `sum_{b in B_u} h_{b,u} w_{b,u}`.
    pub fn signal_rows(&self, masked: &MaskedCsi, user: usize) -> (LinExpr, LinExpr) {
        let mut re = LinExpr::new();
        let mut im = LinExpr::new();
        for &b in masked.coop.serving(user) {
            self.accumulate_product(&mut re, &mut im, &masked.known[&(b, user)], b, user, 1.0);
        }
        (re, im)
    }

    /// Rows whose squared norms sum to the design-model interference caused
    /// by `interferer` at `user` under `mode`:
    ///
    /// * the coherent pair for links known at `user` (with the flat
    ///   `lambda * (1, ..., 1)` surrogate folded in for the naive mode), and
    /// * for the statistical mode, one row per unknown antenna weight scaled
    ///   by `sqrt(|B_i \ B_u|) * lambda`.
    pub fn interference_rows(
        &self,
        masked: &MaskedCsi,
        mode: SinrMode,
        interferer: usize,
        user: usize,
    ) -> Vec<LinExpr> {
        let mut re = LinExpr::new();
        let mut im = LinExpr::new();
        let mut coherent = false;
        for &b in masked.coop.serving(interferer) {
            if masked.coop.contains(b, user) {
                self.accumulate_product(
                    &mut re,
                    &mut im,
                    &masked.known[&(b, user)],
                    b,
                    interferer,
                    1.0,
                );
                coherent = true;
            }
        }
        let unknown = masked.unknown_links(interferer, user);
        let mut rows = Vec::new();
        match mode {
            SinrMode::Full | SinrMode::LimitedZero => {}
            SinrMode::LimitedNaive => {
                for &b in &unknown {
                    let amplitude = masked.lambda_sq[&(b, user)].sqrt();
                    let surrogate = vec![Complex64::new(amplitude, 0.0); self.n_t];
                    self.accumulate_product(&mut re, &mut im, &surrogate, b, interferer, 1.0);
                    coherent = true;
                }
            }
            SinrMode::LimitedLambda => {
                let multiplicity = (unknown.len() as f64).sqrt();
                for &b in &unknown {
                    let scale = multiplicity * masked.lambda_sq[&(b, user)].sqrt();
                    for k in 0..self.n_t {
                        rows.push(LinExpr::term(self.re(b, interferer, k), scale));
                        rows.push(LinExpr::term(self.im(b, interferer, k), scale));
                    }
                }
            }
        }
        if coherent {
            rows.insert(0, im);
            rows.insert(0, re);
        }
        rows
    }

    /// One cone `||stacked user weights|| <= sqrt(budget)` per antenna.
    pub fn add_power_cones(&self, prog: &mut ConicProgram, masked: &MaskedCsi) {
        let budget = masked.per_antenna_power.sqrt();
        for b in 0..masked.num_bs {
            let users = masked.coop.served(b);
            if users.is_empty() {
                continue;
            }
            for k in 0..self.n_t {
                let mut head = Vec::with_capacity(2 * users.len());
                for &u in users {
                    head.push(LinExpr::term(self.re(b, u, k), 1.0));
                    head.push(LinExpr::term(self.im(b, u, k), 1.0));
                }
                prog.add_soc(head, LinExpr::constant(budget));
            }
        }
    }

    /// Reads the precoder out of a solution vector.
    pub fn extract(&self, x: &[f64]) -> Precoder {
        let mut weights = BTreeMap::new();
        for &(b, u) in &self.links {
            let vector: Vec<Complex64> = (0..self.n_t)
                .map(|k| Complex64::new(x[self.re(b, u, k)], x[self.im(b, u, k)]))
                .collect();
            weights.insert((b, u), vector);
        }
        Precoder::from_weights(weights, self.n_t).expect("layout produces consistent lengths")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conic;
    use crate::metrics::{design_sinr, design_denominator};
    use crate::testutil;
    use approx::assert_relative_eq;

    /// Fixes the weight variables to a concrete precoder and checks that the
    /// affine rows reproduce the numeric signal and interference exactly.
    #[test]
    fn rows_match_numeric_evaluation() {
        let (_, _, masked) = testutil::masked_instance(2, 40, 3.0);
        let (scaled, _) = masked.rescaled();
        let precoder = testutil::random_precoder(&scaled, 8);

        let mut prog = ConicProgram::new();
        let vars = LinkVars::allocate(&mut prog, &scaled);
        let mut x = vec![0.0; prog.num_vars()];
        for (&(b, u), w) in precoder.links() {
            for (k, entry) in w.iter().enumerate() {
                x[vars.re(b, u, k)] = entry.re;
                x[vars.im(b, u, k)] = entry.im;
            }
        }

        for u in 0..scaled.num_users {
            let (re, im) = vars.signal_rows(&scaled, u);
            let signal = crate::metrics::signal_term(&scaled, &precoder, u);
            assert_relative_eq!(re.eval(&x), signal.re, max_relative = 1e-12);
            assert_relative_eq!(im.eval(&x), signal.im, max_relative = 1e-12);

            for mode in [
                SinrMode::LimitedZero,
                SinrMode::LimitedLambda,
                SinrMode::LimitedNaive,
            ] {
                let mut total = scaled.noise_power;
                for i in 0..scaled.num_users {
                    if i == u {
                        continue;
                    }
                    let rows = vars.interference_rows(&scaled, mode, i, u);
                    total += rows.iter().map(|r| r.eval(&x).powi(2)).sum::<f64>();
                }
                let denom = design_denominator(&scaled, &precoder, mode, u);
                assert_relative_eq!(total, denom, max_relative = 1e-10);
            }
        }
    }

    /// Power cones clip exactly at the per-antenna budget: maximising one
    /// weight subject to the cones lands on sqrt(budget).
    #[test]
    fn power_cones_enforce_the_budget() {
        let (_, masked) = testutil::toy_two_user();
        let mut prog = ConicProgram::new();
        let vars = LinkVars::allocate(&mut prog, &masked);
        vars.add_power_cones(&mut prog, &masked);
        prog.maximize_term(vars.re(0, 0, 0), 1.0);
        let solution = conic::solve(&prog);
        assert_eq!(solution.status, conic::SolveStatus::Optimal);
        let precoder = vars.extract(&solution.x);
        assert_relative_eq!(
            precoder.antenna_power(0, 0),
            masked.per_antenna_power,
            max_relative = 1e-5
        );
        assert!(precoder.validate_power(masked.per_antenna_power).is_ok());
        let gammas = design_sinr(&masked, &precoder, SinrMode::LimitedLambda);
        assert!(gammas.is_ok());
    }
}
