//! Local regret minimizers: regret matching and regret matching+
//! (Tammelin 2014). One instance lives at every decision node of the
//! deviation DAG.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RmKind {
    Rm,
    RmPlus,
}

#[derive(Debug, Clone)]
pub struct LocalRegretMinimizer {
    kind: RmKind,
    cum_regret: Vec<f64>,
    last: Vec<f64>,
}

impl LocalRegretMinimizer {
    pub fn new(kind: RmKind, n_actions: usize) -> Self {
        LocalRegretMinimizer {
            kind,
            cum_regret: vec![0.0; n_actions],
            last: vec![1.0 / n_actions as f64; n_actions],
        }
    }

    pub fn n_actions(&self) -> usize {
        self.cum_regret.len()
    }

    pub fn cumulative_regret(&self) -> &[f64] {
        &self.cum_regret
    }

    /// Strategy proportional to positive cumulative regret; uniform when
    /// nothing is positive. Cached as the strategy in play.
    pub fn next_strategy(&mut self) -> &[f64] {
        let pos_sum: f64 = self.cum_regret.iter().map(|&r| r.max(0.0)).sum();
        if pos_sum > 0.0 {
            for (s, &r) in self.last.iter_mut().zip(&self.cum_regret) {
                *s = r.max(0.0) / pos_sum;
            }
        } else {
            let u = 1.0 / self.last.len() as f64;
            for s in &mut self.last {
                *s = u;
            }
        }
        &self.last
    }

    pub fn last_strategy(&self) -> &[f64] {
        &self.last
    }

    /// Feeds back the utility vector experienced under the cached
    /// strategy: `R += u - <last, u>`, clamped at zero for RM+.
    pub fn observe(&mut self, utility: &[f64]) {
        debug_assert_eq!(utility.len(), self.cum_regret.len());
        let ev: f64 = self.last.iter().zip(utility).map(|(p, u)| p * u).sum();
        for (r, &u) in self.cum_regret.iter_mut().zip(utility) {
            *r += u - ev;
            if self.kind == RmKind::RmPlus {
                *r = r.max(0.0);
            }
        }
    }
}
