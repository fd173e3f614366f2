//! Run records: per-round rows plus a summary that a verifier can recompute
//! from the rows alone.

use std::path::Path;

use serde::{Deserialize, Serialize};

use agentsel_core::regret::{external_regret, swap_regret};
use anyhow::{Context, Result};

use crate::fmt::fmt_sig;

pub const VERIFY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRow {
    pub round: usize,
    pub arm: usize,
    pub explore: Option<bool>,
    /// Loss observed by the learner (benches) or realized return (games).
    pub loss_or_return: f64,
    pub payment: f64,
    pub tab: f64,
    pub cum_regret_external: f64,
    pub cum_regret_swap: f64,
    /// Full per-arm loss row, recorded for evaluation only.
    pub arm_losses: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct RunSummary {
    pub external_regret: f64,
    pub best_fixed_arm: usize,
    pub swap_regret: f64,
    pub bound_external: Option<f64>,
    pub bound_swap: Option<f64>,
    pub bound_external_satisfied: Option<bool>,
    pub bound_swap_satisfied: Option<bool>,
    /// Games only.
    pub total_principal_utility: Option<f64>,
    pub benchmark_best: Option<f64>,
    pub policy_regret: Option<f64>,
    pub final_tabs: Option<Vec<f64>>,
    pub final_payouts: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub config_hash: String,
    pub seed: u64,
    pub rows: Vec<RoundRow>,
    pub summary: RunSummary,
}

impl RunRecord {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).context("record serialize error")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).context("record parse error")
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)
            .with_context(|| format!("writing {}", path.display()))
    }

    pub fn read_json(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?;
        Self::from_json(&text)
    }

    /// Fixed-schema CSV view of the rows, floats at 8 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "round,arm,explore_flag,loss_or_return,payment,tab,cumulative_regret_external,cumulative_regret_swap\n",
        );
        for row in &self.rows {
            let explore = match row.explore {
                Some(true) => "1",
                Some(false) => "0",
                None => "",
            };
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                row.round,
                row.arm,
                explore,
                fmt_sig(row.loss_or_return, 8),
                fmt_sig(row.payment, 8),
                fmt_sig(row.tab, 8),
                fmt_sig(row.cum_regret_external, 8),
                fmt_sig(row.cum_regret_swap, 8),
            ));
        }
        out
    }

    /// Recomputes every summary field derivable from the rows and compares
    /// within [`VERIFY_TOL`]. Returns the list of mismatched fields.
    pub fn verify(&self) -> Result<Vec<String>> {
        let mut mismatches = Vec::new();
        if self.rows.is_empty() {
            return Ok(vec!["record has no rows".into()]);
        }
        let plays: Vec<usize> = self.rows.iter().map(|r| r.arm).collect();
        let losses: Vec<Vec<f64>> = self.rows.iter().map(|r| r.arm_losses.clone()).collect();
        let (ext, best_arm) = external_regret(&plays, &losses)?;
        let (swap, _) = swap_regret(&plays, &losses)?;
        let mut check = |name: &str, expected: f64, got: f64| {
            if (expected - got).abs() > VERIFY_TOL {
                mismatches.push(format!("{name}: recomputed {expected} vs stored {got}"));
            }
        };
        check("external_regret", ext, self.summary.external_regret);
        check("swap_regret", swap, self.summary.swap_regret);
        if best_arm != self.summary.best_fixed_arm {
            mismatches.push(format!(
                "best_fixed_arm: recomputed {best_arm} vs stored {}",
                self.summary.best_fixed_arm
            ));
        }

        // Cumulative regret columns must match their own prefix recomputation.
        let mut cum = CumulativeRegret::new(losses[0].len());
        for (t, row) in self.rows.iter().enumerate() {
            let (ce, cs) = cum.push(row.arm, &row.arm_losses);
            if (ce - row.cum_regret_external).abs() > VERIFY_TOL
                || (cs - row.cum_regret_swap).abs() > VERIFY_TOL
            {
                mismatches.push(format!("cumulative regret columns diverge at round {t}"));
                break;
            }
        }

        if let Some(tabs) = &self.summary.final_tabs {
            let mut recomputed = vec![0.0f64; tabs.len()];
            for row in &self.rows {
                if row.arm < recomputed.len() {
                    // The tab column stores the selected agent's tab after the
                    // round: the last write per agent is their final tab.
                    recomputed[row.arm] = row.tab;
                }
            }
            for (i, (&r, &s)) in recomputed.iter().zip(tabs.iter()).enumerate() {
                if (r - s).abs() > VERIFY_TOL {
                    mismatches.push(format!("final_tabs[{i}]: recomputed {r} vs stored {s}"));
                }
            }
            if let Some(payouts) = &self.summary.final_payouts {
                for (i, (&t, &p)) in tabs.iter().zip(payouts.iter()).enumerate() {
                    if (t.max(0.0) - p).abs() > VERIFY_TOL {
                        mismatches.push(format!("final_payouts[{i}] inconsistent with tab"));
                    }
                }
            }
        }

        if let (Some(best), Some(pr), Some(total)) = (
            self.summary.benchmark_best,
            self.summary.policy_regret,
            self.summary.total_principal_utility,
        ) {
            if ((best - total) - pr).abs() > VERIFY_TOL {
                mismatches.push(format!(
                    "policy_regret: benchmark {best} - utility {total} != stored {pr}"
                ));
            }
        }
        Ok(mismatches)
    }
}

/// Incremental external/swap regret over a growing play/loss prefix.
pub struct CumulativeRegret {
    arms: usize,
    /// `totals[i][j]`: loss of arm j summed over rounds where i was played.
    totals: Vec<Vec<f64>>,
}

impl CumulativeRegret {
    pub fn new(arms: usize) -> Self {
        CumulativeRegret {
            arms,
            totals: vec![vec![0.0; arms]; arms],
        }
    }

    /// Returns `(external, swap)` regret of the prefix including this round.
    pub fn push(&mut self, play: usize, losses: &[f64]) -> (f64, f64) {
        for (j, &l) in losses.iter().enumerate() {
            self.totals[play][j] += l;
        }
        let realized: f64 = (0..self.arms).map(|i| self.totals[i][i]).sum();
        let best_fixed = (0..self.arms)
            .map(|j| (0..self.arms).map(|i| self.totals[i][j]).sum::<f64>())
            .fold(f64::INFINITY, f64::min);
        let best_swap: f64 = (0..self.arms)
            .map(|i| {
                self.totals[i]
                    .iter()
                    .cloned()
                    .fold(f64::INFINITY, f64::min)
            })
            .sum();
        (realized - best_fixed, realized - best_swap)
    }
}
