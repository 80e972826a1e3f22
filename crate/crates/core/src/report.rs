//! Verdict records shared by every verifier.
//!
//! Two conventions appear in the checked statements: the proposition-level
//! sieve bounds are non-strict (≤) while the theorem-level bounds and the
//! sweep inequality are strict (<). Each report records which convention it
//! was judged under and the slack that was applied, so a margin inside the
//! float-noise band is surfaced as `inconclusive` instead of being silently
//! counted either way.

use serde::Serialize;

/// Relative slack used for strict-inequality checks outside the sweep.
pub const STRICT_SLACK_REL: f64 = 1e-9;
/// Relative slack used when comparing computed constants to stated ones.
pub const CONSTANT_SLACK_REL: f64 = 1e-9;
/// Relative slack for the sweep: a check passes only if margin > slack·rhs.
pub const SWEEP_SLACK_REL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    /// Inequality holds with margin beyond the slack band.
    Pass,
    /// Inequality violated beyond the slack band (strict: margin ≤ 0).
    Fail,
    /// Margin inside the slack band; neither asserted nor refuted.
    Inconclusive,
    /// Only the right-hand side was evaluated (enumeration budget exceeded).
    BoundOnly,
    /// The statement's hypothesis is not met; excluded from verdicts.
    Inapplicable,
}

/// One evaluated inequality.
#[derive(Clone, Debug, Serialize)]
pub struct BoundReport {
    pub label: String,
    pub lhs: Option<f64>,
    pub rhs: f64,
    pub margin: Option<f64>,
    pub slack: f64,
    pub holds: Option<bool>,
    pub status: CheckStatus,
    pub params: serde_json::Value,
}

impl BoundReport {
    /// Judge `lhs < rhs`; margins in `(0, slack_rel·|rhs|]` are inconclusive.
    pub fn strict(
        label: impl Into<String>,
        lhs: f64,
        rhs: f64,
        slack_rel: f64,
        params: serde_json::Value,
    ) -> Self {
        let slack = slack_rel * rhs.abs();
        let margin = rhs - lhs;
        let status = if margin > slack {
            CheckStatus::Pass
        } else if margin > 0.0 {
            CheckStatus::Inconclusive
        } else {
            CheckStatus::Fail
        };
        BoundReport {
            label: label.into(),
            lhs: Some(lhs),
            rhs,
            margin: Some(margin),
            slack,
            holds: Some(status == CheckStatus::Pass),
            status,
            params,
        }
    }

    /// Judge `lhs ≤ rhs`; violations within `slack_rel·|rhs|` are inconclusive.
    pub fn non_strict(
        label: impl Into<String>,
        lhs: f64,
        rhs: f64,
        slack_rel: f64,
        params: serde_json::Value,
    ) -> Self {
        let slack = slack_rel * rhs.abs();
        let margin = rhs - lhs;
        let status = if lhs <= rhs {
            CheckStatus::Pass
        } else if lhs <= rhs + slack {
            CheckStatus::Inconclusive
        } else {
            CheckStatus::Fail
        };
        BoundReport {
            label: label.into(),
            lhs: Some(lhs),
            rhs,
            margin: Some(margin),
            slack,
            holds: Some(status == CheckStatus::Pass),
            status,
            params,
        }
    }

    /// Right-hand side only; no verdict.
    pub fn bound_only(label: impl Into<String>, rhs: f64, params: serde_json::Value) -> Self {
        BoundReport {
            label: label.into(),
            lhs: None,
            rhs,
            margin: None,
            slack: 0.0,
            holds: None,
            status: CheckStatus::BoundOnly,
            params,
        }
    }

    /// Hypothesis not met (e.g. the shape functional does not exceed the
    /// modulus); carries the rhs slot as 0.
    pub fn inapplicable(label: impl Into<String>, params: serde_json::Value) -> Self {
        BoundReport {
            label: label.into(),
            lhs: None,
            rhs: 0.0,
            margin: None,
            slack: 0.0,
            holds: None,
            status: CheckStatus::Inapplicable,
            params,
        }
    }

    pub fn passed(&self) -> bool {
        self.status == CheckStatus::Pass
    }

    /// True when this report should pull an aggregate verdict down.
    pub fn counts_against_verdict(&self) -> bool {
        matches!(self.status, CheckStatus::Fail | CheckStatus::Inconclusive)
    }
}

/// One computed constant judged against its stated value or bound.
#[derive(Clone, Debug, Serialize)]
pub struct ConstantsReport {
    pub name: String,
    pub computed: f64,
    pub paper_bound: Option<f64>,
    pub slack: f64,
    pub verdict: bool,
}

impl ConstantsReport {
    /// Verify `computed ≤ bound`, inflating `computed` by the slack first so
    /// float noise cannot produce a spurious pass.
    pub fn upper_bound_check(name: impl Into<String>, computed: f64, bound: f64) -> Self {
        let slack = CONSTANT_SLACK_REL * computed.abs();
        ConstantsReport {
            name: name.into(),
            computed,
            paper_bound: Some(bound),
            slack,
            verdict: computed + slack <= bound,
        }
    }

    /// Verify `computed ≥ bound`, deflating `computed` by the slack first.
    pub fn lower_bound_check(name: impl Into<String>, computed: f64, bound: f64) -> Self {
        let slack = CONSTANT_SLACK_REL * computed.abs();
        ConstantsReport {
            name: name.into(),
            computed,
            paper_bound: Some(bound),
            slack,
            verdict: computed - slack >= bound,
        }
    }

    /// Verify `|computed − target| ≤ tol`.
    pub fn equality_check(name: impl Into<String>, computed: f64, target: f64, tol: f64) -> Self {
        ConstantsReport {
            name: name.into(),
            computed,
            paper_bound: Some(target),
            slack: tol,
            verdict: (computed - target).abs() <= tol,
        }
    }

    /// Informational value with no stated counterpart.
    pub fn info(name: impl Into<String>, computed: f64) -> Self {
        ConstantsReport {
            name: name.into(),
            computed,
            paper_bound: None,
            slack: 0.0,
            verdict: true,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strict_margin_bands() {
        let pass = BoundReport::strict("t", 1.0, 2.0, 1e-9, serde_json::json!({}));
        assert_eq!(pass.status, CheckStatus::Pass);
        assert_eq!(pass.holds, Some(true));

        let equal = BoundReport::strict("t", 2.0, 2.0, 1e-9, serde_json::json!({}));
        assert_eq!(equal.status, CheckStatus::Fail);

        let near = BoundReport::strict("t", 2.0 - 1e-12, 2.0, 1e-9, serde_json::json!({}));
        assert_eq!(near.status, CheckStatus::Inconclusive);
        assert_eq!(near.holds, Some(false));
    }

    #[test]
    fn non_strict_allows_equality() {
        let equal = BoundReport::non_strict("t", 2.0, 2.0, 1e-9, serde_json::json!({}));
        assert_eq!(equal.status, CheckStatus::Pass);

        let over = BoundReport::non_strict("t", 2.0 + 1e-11, 2.0, 1e-9, serde_json::json!({}));
        assert_eq!(over.status, CheckStatus::Inconclusive);

        let bad = BoundReport::non_strict("t", 3.0, 2.0, 1e-9, serde_json::json!({}));
        assert_eq!(bad.status, CheckStatus::Fail);
    }

    #[test]
    fn constants_slack_is_upward_safe() {
        // Exactly at the bound: the slack must push the verdict to false.
        let r = ConstantsReport::upper_bound_check("c", 10.27, 10.27);
        assert!(!r.verdict);
        let ok = ConstantsReport::upper_bound_check("c", 10.26, 10.27);
        assert!(ok.verdict);
    }
}
