//! Number formatting and small value parsers shared by the subcommands.

use num_complex::Complex64;

pub const SIG_DIGITS: usize = 12;

/// `%.12g`: twelve significant digits, trailing zeros dropped.
pub fn fmt_g(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{:.*e}", SIG_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= SIG_DIGITS as i32 {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    } else {
        let decimals = (SIG_DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Rounds to the printed precision so JSON artifacts carry the same digits as stdout.
pub fn round_g(x: f64) -> f64 {
    if x.is_finite() {
        fmt_g(x).parse().unwrap_or(x)
    } else {
        x
    }
}

pub fn fmt_complex(z: Complex64) -> String {
    format!("{},{}", fmt_g(z.re), fmt_g(z.im))
}

/// `re,im` or a bare real.
pub fn parse_complex(s: &str) -> Option<Complex64> {
    let mut parts = s.split(',');
    let re: f64 = parts.next()?.trim().parse().ok()?;
    let im: f64 = match parts.next() {
        Some(p) => p.trim().parse().ok()?,
        None => 0.0,
    };
    if parts.next().is_some() || re.is_nan() || im.is_nan() {
        return None;
    }
    Some(Complex64::new(re, im))
}

/// Comma-separated positive integers.
pub fn parse_usize_list(s: &str) -> Option<Vec<usize>> {
    s.split(',').map(|p| p.trim().parse().ok()).collect()
}
