//! Number formatting for terminal output.

/// `x` with 8 significant digits, fixed notation for moderate magnitudes.
pub fn sig8(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return "0".into();
    }
    let e = x.abs().log10().floor() as i32;
    // Rounding can carry into the next decade; format once to find out.
    let sci = format!("{x:.7e}");
    let e = sci.rsplit_once('e').and_then(|(_, exp)| exp.parse::<i32>().ok()).unwrap_or(e);
    if (-4..8).contains(&e) {
        format!("{:.*}", (7 - e) as usize, x)
    } else {
        sci
    }
}

/// Space-separated [`sig8`] values.
pub fn sig8_list(xs: &[f64]) -> String {
    xs.iter().map(|&x| sig8(x)).collect::<Vec<_>>().join(" ")
}
