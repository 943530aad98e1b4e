//! Finite-length ensemble enumerators built from the composition operators.

use super::asymptotic::AsymptoticEnsemble;
use super::closed::tabulate;
use super::{
    acc_iowe, fsm_iowe, partial_precode, rep_iowe, systematic_join, turbo_two_branch, uniform_concat, Fsm, Iowe,
    PunctureMask, PuncturedAccumulator, Repetition, Termination,
};
use crate::error::{invalid, Result};

/// Code ensembles with exact ensemble-average enumerators.
#[derive(Debug, Clone, PartialEq)]
pub enum Ensemble {
    /// `rep(N, q)` → uniform interleaver → accumulator of length `qN`.
    Nsra { n: usize, q: usize },
    /// Systematic bits ∥ [`rep(N, q)` → interleaver → accumulator with every
    /// `p`-th output kept].
    Spra { n: usize, p: usize, q: usize },
    /// SPRA preceded by an accumulator precoder that `m` of the `N`
    /// information bits bypass.
    Spara { n: usize, m: usize, p: usize, q: usize },
    /// Systematic bits ∥ two terminated RSC parity branches joined by a
    /// uniform interleaver.
    Turbo { k: usize, rsc: Fsm },
}

impl Ensemble {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Ensemble::Nsra { n, q } => {
                if n == 0 || q < 2 {
                    return Err(invalid!("NSRA needs N >= 1 and q >= 2"));
                }
            }
            Ensemble::Spra { n, p, q } | Ensemble::Spara { n, p, q, .. } => {
                if n == 0 || p == 0 || q == 0 {
                    return Err(invalid!("N, p and q must be positive"));
                }
                if (q * n) % p != 0 {
                    return Err(invalid!("puncturing period {p} must divide qN = {}", q * n));
                }
                if let Ensemble::Spara { m, .. } = *self {
                    if m > n {
                        return Err(invalid!("M = {m} exceeds N = {n}"));
                    }
                }
            }
            Ensemble::Turbo { k, .. } => {
                if k == 0 {
                    return Err(invalid!("turbo interleaver length must be positive"));
                }
            }
        }
        Ok(())
    }

    pub fn info_length(&self) -> usize {
        match *self {
            Ensemble::Nsra { n, .. } | Ensemble::Spra { n, .. } | Ensemble::Spara { n, .. } => n,
            Ensemble::Turbo { k, .. } => k,
        }
    }

    /// Transmitted bits per block.
    pub fn block_length(&self) -> Result<usize> {
        Ok(match self {
            Ensemble::Nsra { n, q } => n * q,
            Ensemble::Spra { n, p, q } | Ensemble::Spara { n, p, q, .. } => n + n * q / p,
            Ensemble::Turbo { k, rsc } => {
                let tail = rsc.termination_tails()?[0].len() * rsc.outputs();
                k + 2 * (k + tail)
            }
        })
    }

    /// Whether the ensemble is declared to satisfy the growth and uniform
    /// convergence conditions on its spectrum required by the region test.
    pub fn declares_regular_growth(&self) -> bool {
        !matches!(self, Ensemble::Turbo { .. })
    }

    /// Exact ensemble-average IOWE. `budget` caps trellis tables.
    pub fn iowe(&self, budget: u128) -> Result<Iowe> {
        self.validate()?;
        match self {
            &Ensemble::Nsra { n, q } => uniform_concat(&rep_iowe(n, q)?, &acc_iowe(n * q)),
            &Ensemble::Spra { n, p, q } => {
                let inner = PuncturedAccumulator::new(n * q / p, p)?;
                Ok(systematic_join(&uniform_concat(&Repetition::new(n, q)?, &inner)?))
            }
            &Ensemble::Spara { n, m, p, q } => {
                let pre = partial_precode(n, n - m)?;
                let pre_rep = uniform_concat(&pre, &Repetition::new(n, q)?)?;
                let inner = PuncturedAccumulator::new(n * q / p, p)?;
                Ok(systematic_join(&uniform_concat(&pre_rep, &inner)?))
            }
            Ensemble::Turbo { k, rsc } => {
                let branch = turbo_branch(rsc, *k, budget)?;
                turbo_two_branch(&branch, *k)
            }
        }
    }

    /// The matching large-N exponent family, where one exists.
    pub fn asymptotic(&self) -> Result<AsymptoticEnsemble> {
        match *self {
            Ensemble::Nsra { q, .. } => AsymptoticEnsemble::nsra(q),
            Ensemble::Spra { p, q, .. } => AsymptoticEnsemble::spra(p, q),
            Ensemble::Spara { n, m, p, q } => AsymptoticEnsemble::spara(p, q, m as f64 / n as f64),
            Ensemble::Turbo { .. } => Err(invalid!("no asymptotic exponent is provided for turbo ensembles")),
        }
    }
}

/// Parity-only IOWE of one terminated RSC branch: systematic outputs are
/// dropped during the information phase, tail outputs are all kept.
pub fn turbo_branch(rsc: &Fsm, k: usize, budget: u128) -> Result<Iowe> {
    if rsc.outputs() != 2 {
        return Err(invalid!("turbo branches need a rate-1/2 systematic encoder"));
    }
    let mask = PunctureMask::new(alloc::vec![false, true])?;
    fsm_iowe(rsc, k, &mask, Termination::Zero, budget)
}

/// The punctured accumulator as a table, for cross-checks against `fsm_iowe`.
pub fn punctured_acc_iowe(groups: usize, period: usize) -> Result<Iowe> {
    Ok(tabulate(&PuncturedAccumulator::new(groups, period)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::DEFAULT_CELL_BUDGET;
    use core::f64::consts::LN_2;

    #[test]
    fn ensembles_are_complete() {
        let cases = [
            Ensemble::Nsra { n: 12, q: 3 },
            Ensemble::Spra { n: 12, p: 3, q: 6 },
            Ensemble::Spara { n: 15, m: 6, p: 3, q: 6 },
            Ensemble::Turbo { k: 10, rsc: Fsm::rsc(0b11111, 0b10001).unwrap() },
        ];
        for e in cases {
            let t = e.iowe(DEFAULT_CELL_BUDGET).unwrap();
            assert_eq!(t.output_len(), e.block_length().unwrap());
            let k = e.info_length() as f64;
            assert!((t.log_total() - k * LN_2).abs() < 1e-9 * k, "{e:?}");
            assert_eq!(t.get(0, 0), 0.0);
        }
    }

    #[test]
    fn rate_one_third_lengths() {
        assert_eq!(Ensemble::Spra { n: 8, p: 3, q: 6 }.block_length().unwrap(), 24);
        let t = Ensemble::Turbo { k: 200, rsc: Fsm::rsc(0b11111, 0b10001).unwrap() };
        assert_eq!(t.block_length().unwrap(), 616);
        assert!(Ensemble::Spra { n: 5, p: 4, q: 6 }.validate().is_err());
    }

    #[test]
    fn spara_without_precoding_is_spra() {
        let a = Ensemble::Spra { n: 9, p: 3, q: 6 }.iowe(DEFAULT_CELL_BUDGET).unwrap();
        let b = Ensemble::Spara { n: 9, m: 9, p: 3, q: 6 }.iowe(DEFAULT_CELL_BUDGET).unwrap();
        let (d, same) = a.max_log_diff(&b);
        assert!(same && d < 1e-10);
    }
}
