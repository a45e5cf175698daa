use std::io::Write;

use super::VerificationEvent;
use crate::scalar::Scalar;

/// Writes `iteration,round,half_round,rule,variable,value` rows.
pub fn write_events_csv<T: Scalar, W: Write>(
    out: W,
    events: &[VerificationEvent<T>],
) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "iteration",
        "round",
        "half_round",
        "rule",
        "variable",
        "value",
    ])?;
    for e in events {
        w.write_record([
            e.iteration.to_string(),
            e.round.to_string(),
            e.half_round.to_string(),
            e.rule.as_str().to_string(),
            e.variable.to_string(),
            e.value.to_real().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `iteration,alpha_hat` rows, one per entry of `trajectory`.
pub fn write_trajectory_csv<W: Write>(out: W, trajectory: &[f64]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["iteration", "alpha_hat"])?;
    for (i, a) in trajectory.iter().enumerate() {
        w.write_record([i.to_string(), a.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
