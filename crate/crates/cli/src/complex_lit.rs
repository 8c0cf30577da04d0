//! Complex literals in suffix form.
//!
//! Grammar:
//!
//! ```text
//! complex := real | imag | real sign imag-magnitude
//! imag    := [float] "i"          bare "i" and "-i" mean the unit
//! real    := float
//! float   := f64 literal, exponents allowed
//! ```
//!
//! Examples: `2`, `-1.5e-3`, `0.05i`, `i`, `-i`, `1+2i`, `2e-3-1e-2i`.

use num_complex::Complex64;

pub fn parse_complex(input: &str) -> Result<Complex64, String> {
    let s = input.trim();
    if s.is_empty() {
        return Err("empty complex literal".into());
    }
    if let Some(body) = s.strip_suffix(['i', 'I']) {
        // Look for the sign splitting a real part from the imaginary part,
        // skipping exponent signs and a leading sign.
        if let Some(pos) = split_sign(body) {
            let re: f64 = body[..pos]
                .parse()
                .map_err(|_| format!("bad real part in `{input}`"))?;
            let im = parse_signed_unit(&body[pos..], input)?;
            return Ok(Complex64::new(re, im));
        }
        let im = parse_signed_unit(body, input)?;
        return Ok(Complex64::new(0.0, im));
    }
    if split_sign(s).is_some() {
        return Err(format!(
            "`{input}` has two components but no trailing i; write a+bi"
        ));
    }
    let re: f64 = s.parse().map_err(|_| format!("bad number `{input}`"))?;
    Ok(Complex64::new(re, 0.0))
}

/// Index of the `+`/`-` separating real and imaginary components, if any.
fn split_sign(s: &str) -> Option<usize> {
    let bytes = s.as_bytes();
    for i in (1..bytes.len()).rev() {
        let b = bytes[i];
        if b == b'+' || b == b'-' {
            let prev = bytes[i - 1];
            if prev == b'e' || prev == b'E' {
                continue;
            }
            return Some(i);
        }
    }
    None
}

fn parse_signed_unit(body: &str, input: &str) -> Result<f64, String> {
    match body {
        "" | "+" => Ok(1.0),
        "-" => Ok(-1.0),
        _ => body
            .parse()
            .map_err(|_| format!("bad imaginary part in `{input}`")),
    }
}

/// `a,b` pair of complex literals.
pub fn parse_complex_pair(input: &str) -> Result<[Complex64; 2], String> {
    let parts: Vec<&str> = input.split(',').collect();
    if parts.len() != 2 {
        return Err(format!("`{input}` must be two comma-separated values"));
    }
    Ok([parse_complex(parts[0])?, parse_complex(parts[1])?])
}

/// `n=value` strength binding.
pub fn parse_gamma_binding(input: &str) -> Result<(usize, Complex64), String> {
    let (idx, val) = input
        .split_once('=')
        .ok_or_else(|| format!("`{input}` must look like n=value"))?;
    let n: usize = idx
        .trim()
        .parse()
        .map_err(|_| format!("bad strength index `{idx}`"))?;
    if n == 0 {
        return Err("strength indices start at 1".into());
    }
    Ok((n, parse_complex(val)?))
}

/// `t0,t1` real pair.
pub fn parse_real_pair(input: &str) -> Result<(f64, f64), String> {
    let parts: Vec<&str> = input.split(',').collect();
    if parts.len() != 2 {
        return Err(format!("`{input}` must be two comma-separated numbers"));
    }
    let a: f64 = parts[0]
        .trim()
        .parse()
        .map_err(|_| format!("bad number `{}`", parts[0]))?;
    let b: f64 = parts[1]
        .trim()
        .parse()
        .map_err(|_| format!("bad number `{}`", parts[1]))?;
    Ok((a, b))
}
