//! Deterministic numeric formatting: 12 significant digits, '.' separator,
//! no locale dependence, trailing zeros trimmed (the classic `%.12g` shape).

/// Formats `x` with 12 significant digits.
pub fn sig12(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    // round to 12 significant digits first, then pick the notation
    let scientific = format!("{x:.11e}");
    let (_, exponent) = scientific
        .split_once('e')
        .expect("{:e} always carries an exponent");
    let exponent: i32 = exponent.parse().expect("exponent is an integer");

    if (-4..12).contains(&exponent) {
        let decimals = (11 - exponent).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}"))
    } else {
        let (mantissa, _) = scientific.split_once('e').unwrap();
        format!("{}e{}", trim_zeros(mantissa), exponent)
    }
}

fn trim_zeros(s: &str) -> String {
    if !s.contains('.') {
        return s.to_string();
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// Joins one CSV record; fields are plain numbers or bare words, so no
/// quoting is ever needed.
pub fn csv_line<I: IntoIterator<Item = String>>(fields: I) -> String {
    let mut line = fields.into_iter().collect::<Vec<_>>().join(",");
    line.push('\n');
    line
}
