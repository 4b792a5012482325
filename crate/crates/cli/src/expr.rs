//! Right-hand sides given as expressions in x1, x2.
//!
//! Besides the usual arithmetic, powers, `exp` and `abs`, two helpers are available:
//! `constant(c)` and `bump(c1, [c2,] width, height)`, a C∞ bump of the given height
//! supported on the ball of radius `width` around the centre.

use std::sync::Arc;

use meval::{Context, Expr};
use nonlocal_obstacle::ScalarFn;

use crate::error::CliError;

fn bump(x: [f64; 2], c: [f64; 2], w: f64, a: f64) -> f64 {
    let r2 = ((x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2)) / (w * w);
    if r2 < 1.0 {
        a * (1.0 - 1.0 / (1.0 - r2)).exp()
    } else {
        0.0
    }
}

thread_local! {
    static CONTEXT: Context<'static> = {
        let mut c = Context::new();
        c.func("constant", |v| v);
        // The evaluation point is passed as the leading arguments; see `parse`.
        c.funcn("bump1_", |a: &[f64]| bump([a[0], 0.0], [a[1], 0.0], a[2], a[3]), 4);
        c.funcn("bump2_", |a: &[f64]| bump([a[0], a[1]], [a[2], a[3]], a[4], a[5]), 6);
        c
    };
}

/// Parses `src` into a callable of the point. `dim` selects the bump arity.
pub fn parse(src: &str, dim: usize) -> Result<ScalarFn, CliError> {
    // bump(...) needs the evaluation point; pass it through as leading arguments.
    let lead = if dim == 1 { "bump1_(x1, " } else { "bump2_(x1, x2, " };
    let rewritten = src.replace("bump(", lead);
    let expr: Expr = rewritten.parse().map_err(|e| CliError::Config(format!("f: cannot parse {src:?}: {e}")))?;
    let probe = CONTEXT.with(|c| expr.eval_with_context(([("x1", 0.1), ("x2", 0.1)], c)));
    if let Err(e) = probe {
        let msg = match e {
            meval::Error::Function(name, _) if name.starts_with("bump") => {
                format!("bump takes {} arguments in dimension {dim}", if dim == 1 { 3 } else { 4 })
            }
            e => e.to_string(),
        };
        return Err(CliError::Config(format!("f: {msg} in {src:?}")));
    }
    Ok(Arc::new(move |x: [f64; 2]| {
        CONTEXT.with(|c| expr.eval_with_context(([("x1", x[0]), ("x2", x[1])], c)).unwrap_or(f64::NAN))
    }))
}
