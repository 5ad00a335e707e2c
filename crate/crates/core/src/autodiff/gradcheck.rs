use super::{Tape, Var};
use crate::{Error, Matrix, Result};

/// `|a − n| / max(1, |a|, |n|)`.
pub fn rel_err(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / 1f64.max(analytic.abs()).max(numeric.abs())
}

/// Compares tape gradients of `f` against central differences
/// `(f(x+h) − f(x−h)) / 2h`, coordinate by coordinate over every input.
/// Returns the largest [`rel_err`].
///
/// `f` receives a fresh tape and one leaf per input and must return a 1×1
/// tensor. It is called `1 + 2·Σ|inputs|` times and must be deterministic.
pub fn gradcheck<F>(f: F, inputs: &[Matrix], h: f64) -> Result<f64>
where
    F: Fn(&mut Tape, &[Var]) -> Result<Var>,
{
    if h <= 0.0 {
        return Err(Error::Config("finite-difference step must be positive".into()));
    }
    let eval = |values: &[Matrix]| -> Result<f64> {
        let mut tape = Tape::new();
        let vars = values
            .iter()
            .map(|m| tape.leaf(m.clone(), false))
            .collect::<Result<Vec<_>>>()?;
        let out = f(&mut tape, &vars)?;
        Ok(tape.value(out).get(0, 0))
    };

    let mut tape = Tape::new();
    let vars = inputs
        .iter()
        .map(|m| tape.leaf(m.clone(), true))
        .collect::<Result<Vec<_>>>()?;
    let out = f(&mut tape, &vars)?;
    let grads = tape.backward(out)?;

    let mut worst = 0.0f64;
    let mut work: Vec<Matrix> = inputs.to_vec();
    for (k, &v) in vars.iter().enumerate() {
        let analytic = grads.get_or_zeros(v);
        for idx in 0..inputs[k].len() {
            let orig = inputs[k].data()[idx];
            work[k].data_mut()[idx] = orig + h;
            let plus = eval(&work)?;
            work[k].data_mut()[idx] = orig - h;
            let minus = eval(&work)?;
            work[k].data_mut()[idx] = orig;
            let numeric = (plus - minus) / (2.0 * h);
            worst = worst.max(rel_err(analytic.data()[idx], numeric));
        }
    }
    Ok(worst)
}
