//! Multivariate polynomials on the unit cube, used as smooth boundary and
//! conditional-probability families with exact evaluation and derivatives.

use serde::{Deserialize, Serialize};

use crate::error::{input, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub coef: f64,
    /// Exponent of each variable.
    pub powers: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    pub vars: usize,
    pub terms: Vec<Monomial>,
}

impl Polynomial {
    pub fn new(vars: usize, terms: Vec<Monomial>) -> Result<Self> {
        if let Some(t) = terms.iter().find(|t| t.powers.len() != vars) {
            return input(format!(
                "monomial has {} exponents, polynomial has {vars} variables",
                t.powers.len()
            ));
        }
        if terms.iter().any(|t| !t.coef.is_finite()) {
            return input("polynomial coefficients must be finite");
        }
        Ok(Self { vars, terms })
    }

    pub fn constant(vars: usize, c: f64) -> Self {
        Self {
            vars,
            terms: vec![Monomial {
                coef: c,
                powers: vec![0; vars],
            }],
        }
    }

    /// `c + Σ a_i u_i`.
    pub fn affine(c: f64, slopes: &[f64]) -> Self {
        let vars = slopes.len();
        let mut terms = vec![Monomial {
            coef: c,
            powers: vec![0; vars],
        }];
        for (i, &a) in slopes.iter().enumerate() {
            let mut powers = vec![0; vars];
            powers[i] = 1;
            terms.push(Monomial { coef: a, powers });
        }
        Self { vars, terms }
    }

    /// Convenience constructor from `(coef, powers)` pairs.
    pub fn from_terms(vars: usize, terms: &[(f64, &[u32])]) -> Result<Self> {
        Self::new(
            vars,
            terms
                .iter()
                .map(|(c, p)| Monomial {
                    coef: *c,
                    powers: p.to_vec(),
                })
                .collect(),
        )
    }

    pub fn degree(&self) -> u32 {
        self.terms
            .iter()
            .filter(|t| t.coef != 0.0)
            .map(|t| t.powers.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    pub fn eval(&self, u: &[f64]) -> f64 {
        debug_assert_eq!(u.len(), self.vars);
        self.terms
            .iter()
            .map(|t| {
                t.coef
                    * t.powers
                        .iter()
                        .zip(u)
                        .map(|(&p, &x)| x.powi(p as i32))
                        .product::<f64>()
            })
            .sum()
    }

    /// Partial derivative with respect to variable `var`.
    pub fn derivative(&self, var: usize) -> Polynomial {
        let terms = self
            .terms
            .iter()
            .filter(|t| t.powers[var] > 0)
            .map(|t| {
                let mut powers = t.powers.clone();
                powers[var] -= 1;
                Monomial {
                    coef: t.coef * t.powers[var] as f64,
                    powers,
                }
            })
            .collect();
        Polynomial {
            vars: self.vars,
            terms,
        }
    }

    pub fn gradient(&self) -> Vec<Polynomial> {
        (0..self.vars).map(|v| self.derivative(v)).collect()
    }

    /// Upper bound of `sup |p|` on `[0,1]^k` (sum of absolute coefficients).
    pub fn sup_bound(&self) -> f64 {
        self.terms.iter().map(|t| t.coef.abs()).sum()
    }

    /// Upper bound of the Hölder norm with smoothness `alpha` on `[0,1]^k`:
    /// with `m = ⌈α⌉ − 1` and `s = α − m ∈ (0, 1]`, the sum of the sup norms of
    /// all derivatives of order `≤ m` plus the `s`-Hölder seminorms of the order-`m`
    /// derivatives. Each seminorm is bounded by `Lip · k^{(1−s)/2}`, and each sup
    /// norm by the absolute coefficient sum.
    pub fn holder_norm_bound(&self, alpha: f64) -> f64 {
        assert!(alpha > 0.0, "Hölder smoothness must be positive");
        let m = alpha.ceil() as u32 - 1;
        let s = alpha - m as f64;
        let k = self.vars.max(1) as f64;
        let mut total = 0.0;
        let mut frontier = vec![self.clone()];
        for order in 0..=m {
            total += frontier.iter().map(Polynomial::sup_bound).sum::<f64>();
            let next: Vec<Polynomial> = frontier.iter().flat_map(|p| p.gradient()).collect();
            if order == m {
                // Lipschitz bound of each order-m derivative via its gradient
                for (chunk, _) in next.chunks(self.vars.max(1)).zip(&frontier) {
                    let lip = chunk
                        .iter()
                        .map(|g| g.sup_bound().powi(2))
                        .sum::<f64>()
                        .sqrt();
                    total += lip * k.powf((1.0 - s) / 2.0);
                }
            }
            frontier = next;
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_and_derivative() {
        let p =
            Polynomial::from_terms(2, &[(0.5, &[0, 0]), (2.0, &[2, 1]), (-1.0, &[0, 3])]).unwrap();
        let u = [0.3, 0.6];
        let want = 0.5 + 2.0 * 0.09 * 0.6 - 0.216;
        assert!((p.eval(&u) - want).abs() < 1e-15);
        let dx = p.derivative(0);
        assert!((dx.eval(&u) - 4.0 * 0.3 * 0.6).abs() < 1e-15);
        assert_eq!(p.degree(), 3);
    }

    #[test]
    fn holder_bound_of_linear_function() {
        // p(u) = 0.2 + 0.3u, α = 1: sup ≤ 0.5, Lipschitz 0.3
        let p = Polynomial::affine(0.2, &[0.3]);
        assert!((p.holder_norm_bound(1.0) - 0.8).abs() < 1e-12);
        assert!(Polynomial::new(
            2,
            vec![Monomial {
                coef: 1.0,
                powers: vec![1]
            }]
        )
        .is_err());
    }
}
