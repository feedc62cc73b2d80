//! Geometric slice lengths `tau_hat_p = beta * alpha^p`, kept exact.

use num_traits::One;

use crate::analysis::formulas::max_parallelism;
use crate::model::{Instance, JobId};
use crate::rational::{floor_u64, format, from_u64, Rational};

use super::SchedulerError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeometricConfig {
    pub alpha: Rational,
    pub beta: Rational,
    /// Index of the last phase.
    pub ell: usize,
    /// `M - s`.
    pub capacity: u64,
    /// `beta * alpha^p`, uncapped.
    pub slice_hat: Vec<Rational>,
    /// `min(floor(slice_hat[p]), M - s)`.
    pub slice_int: Vec<u64>,
}

impl GeometricConfig {
    /// Derives `ell = floor(log_alpha(capacity))` and
    /// `beta = capacity / alpha^ell`, so the last slice is exactly `capacity`.
    pub fn new(alpha: &Rational, capacity: u64) -> Result<Self, SchedulerError> {
        Self::with_beta(alpha, None, capacity)
    }

    /// With `beta` given, phases continue until `beta * alpha^p >= capacity`.
    pub fn with_beta(
        alpha: &Rational,
        beta: Option<&Rational>,
        capacity: u64,
    ) -> Result<Self, SchedulerError> {
        if *alpha <= Rational::one() {
            return Err(SchedulerError::InvalidAlpha(format(alpha)));
        }
        if capacity == 0 {
            return Err(SchedulerError::InvalidCapacity);
        }
        let cap = from_u64(capacity);
        let (beta, ell) = match beta {
            None => {
                let mut power = Rational::one();
                let mut ell = 0usize;
                while &power * alpha <= cap {
                    power = &power * alpha;
                    ell += 1;
                }
                (&cap / power, ell)
            }
            Some(b) => {
                if *b < Rational::one() {
                    return Err(SchedulerError::InvalidBeta(format(b)));
                }
                let mut hat = b.clone();
                let mut ell = 0usize;
                while hat < cap {
                    hat = &hat * alpha;
                    ell += 1;
                }
                (b.clone(), ell)
            }
        };
        let mut slice_hat = Vec::with_capacity(ell + 1);
        let mut hat = beta.clone();
        for _ in 0..=ell {
            slice_hat.push(hat.clone());
            hat = &hat * alpha;
        }
        let slice_int = slice_hat
            .iter()
            .map(|h| floor_u64(h).min(capacity))
            .collect();
        Ok(Self {
            alpha: alpha.clone(),
            beta,
            ell,
            capacity,
            slice_hat,
            slice_int,
        })
    }

    pub fn for_instance(
        inst: &Instance,
        alpha: &Rational,
        beta: Option<&Rational>,
    ) -> Result<Self, SchedulerError> {
        Self::with_beta(alpha, beta, inst.capacity())
    }

    pub fn phases(&self) -> usize {
        self.ell + 1
    }

    /// Smallest `p` with `o <= tau_hat_p`; the last phase for anything larger.
    pub fn class_of(&self, o: u64) -> usize {
        let o = from_u64(o);
        self.slice_hat
            .iter()
            .position(|h| o <= *h)
            .unwrap_or(self.ell)
    }

    /// Lower end of class `p`: `tau_hat_{p-1}`, or `min(beta/alpha, 1)` for
    /// the first class.
    pub fn class_floor(&self, p: usize) -> Rational {
        if p == 0 {
            (&self.beta / &self.alpha).min(Rational::one())
        } else {
            self.slice_hat[p - 1].clone()
        }
    }

    /// Job ids per class, ordered by `(o, id)`.
    pub fn classes(&self, inst: &Instance) -> Vec<Vec<JobId>> {
        let mut classes = vec![Vec::new(); self.phases()];
        let mut order: Vec<JobId> = (0..inst.n()).collect();
        order.sort_by_key(|&j| (inst.response_len(j), j));
        for j in order {
            classes[self.class_of(inst.response_len(j))].push(j);
        }
        classes
    }

    /// `k*(tau_p, s)` for every phase.
    pub fn parallelism(&self, prompt_len: u64, budget: u64) -> Result<Vec<u64>, SchedulerError> {
        self.slice_int
            .iter()
            .map(|&tau| max_parallelism(tau, prompt_len, budget).map_err(SchedulerError::from))
            .collect()
    }
}
