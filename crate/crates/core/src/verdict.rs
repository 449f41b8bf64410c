use serde::Serialize;

/// Outcome of a numerical stability test on a sequence of refinements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// The sequence settled: the property holds (bounded, Carleson, ...).
    Holds,
    /// The sequence kept growing: the property fails.
    Fails,
    Undecided,
}

impl Verdict {
    pub fn as_bool(self) -> Option<bool> {
        match self {
            Verdict::Holds => Some(true),
            Verdict::Fails => Some(false),
            Verdict::Undecided => None,
        }
    }
}

/// Classifies a refinement sequence.
///
/// `Fails` when each of the last `growth_steps` values exceeds its
/// predecessor by more than `growth_tol` (relative); `Holds` when the last
/// relative change is at most `stable_tol`; `Undecided` otherwise.
pub fn trend(values: &[f64], stable_tol: f64, growth_tol: f64, growth_steps: usize) -> Verdict {
    let n = values.len();
    if values.iter().any(|v| v.is_infinite()) {
        return Verdict::Fails;
    }
    if n >= growth_steps + 1 && growth_steps > 0 {
        let grows = values[n - growth_steps - 1..]
            .windows(2)
            .all(|w| w[1] > w[0] * (1.0 + growth_tol) && w[1] > 0.0);
        if grows {
            return Verdict::Fails;
        }
    }
    if n >= 2 && relative_change(values[n - 2], values[n - 1]) <= stable_tol {
        return Verdict::Holds;
    }
    Verdict::Undecided
}

/// Like `trend`, for boundedness tests: a sequence that stops growing is
/// bounded even when it is still falling fast.
pub fn bounded_trend(values: &[f64], tol: f64, growth_steps: usize) -> Verdict {
    match trend(values, tol, tol, growth_steps) {
        Verdict::Undecided => {
            let n = values.len();
            if n >= 2 && values[n - 1] <= values[n - 2] * (1.0 + tol) {
                Verdict::Holds
            } else {
                Verdict::Undecided
            }
        }
        v => v,
    }
}

/// `|b - a| / max(|a|, |b|)`, zero when both vanish.
pub fn relative_change(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (b - a).abs() / scale
    }
}
