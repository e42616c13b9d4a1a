//! Comma lists and `start:stop[:step]` ranges.

use crate::error::{CliError, Result};

pub fn floats(name: &str, s: &str) -> Result<Vec<f64>> {
    let values = s
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("--{name}: `{t}` is not a number")))
        })
        .collect::<Result<Vec<f64>>>()?;
    if values.is_empty() {
        return Err(CliError::Usage(format!("--{name}: empty list")));
    }
    Ok(values)
}

fn int(name: &str, t: &str) -> Result<u64> {
    t.trim()
        .parse::<u64>()
        .map_err(|_| CliError::Usage(format!("--{name}: `{t}` is not a non-negative integer")))
}

/// `5,20,100`, `1:100` or `10:1000:10` (inclusive), or a mix separated by
/// commas. Order is kept.
pub fn integers(name: &str, s: &str) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    for part in s.split(',') {
        let fields: Vec<&str> = part.split(':').collect();
        match fields.as_slice() {
            [v] => out.push(int(name, v)?),
            [a, b] | [a, b, _] => {
                let (a, b) = (int(name, a)?, int(name, b)?);
                let step = if fields.len() == 3 { int(name, fields[2])? } else { 1 };
                if step == 0 || a > b {
                    return Err(CliError::Usage(format!("--{name}: bad range `{part}`")));
                }
                out.extend((a..=b).step_by(step as usize));
            }
            _ => return Err(CliError::Usage(format!("--{name}: bad range `{part}`"))),
        }
    }
    Ok(out)
}
