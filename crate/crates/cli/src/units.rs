//! Flag-value parsing: SI floats with optional unit suffixes, and the
//! `name:min:max:count[:log]` grid syntax.

use mesofringe::{AxisKind, AxisSpec};

pub fn parse_length(s: &str) -> Result<f64, String> {
    parse_with_units(s, &[("nm", 1e-9), ("um", 1e-6), ("µm", 1e-6), ("mm", 1e-3), ("m", 1.0)])
}

pub fn parse_time(s: &str) -> Result<f64, String> {
    parse_with_units(s, &[("ns", 1e-9), ("us", 1e-6), ("µs", 1e-6), ("ms", 1e-3), ("s", 1.0)])
}

pub fn parse_temperature(s: &str) -> Result<f64, String> {
    parse_with_units(s, &[("K", 1.0)])
}

fn parse_with_units(s: &str, units: &[(&str, f64)]) -> Result<f64, String> {
    let s = s.trim();
    for (suffix, scale) in units {
        if let Some(stripped) = s.strip_suffix(suffix) {
            // "1e-3" must not match the "m" of "1e-3m" prematurely; the
            // remainder has to parse as a bare number.
            if let Ok(v) = stripped.trim().parse::<f64>() {
                return Ok(v * scale);
            }
        }
    }
    s.parse::<f64>()
        .map_err(|_| format!("cannot parse `{s}` as a number (SI value or unit-suffixed)"))
}

/// `T:0:3000:60` or `d:1e-8:1e-6:40:log`; values are plain SI numbers.
pub fn parse_axis(s: &str) -> Result<AxisSpec, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 4 && parts.len() != 5 {
        return Err(format!(
            "grid axis `{s}` must be name:min:max:count[:log]"
        ));
    }
    let kind = AxisKind::parse(parts[0])
        .ok_or_else(|| format!("unknown axis `{}` (use T, d or t)", parts[0]))?;
    let min: f64 = parts[1].parse().map_err(|_| format!("bad min in `{s}`"))?;
    let max: f64 = parts[2].parse().map_err(|_| format!("bad max in `{s}`"))?;
    let count: usize = parts[3].parse().map_err(|_| format!("bad count in `{s}`"))?;
    let log = match parts.get(4) {
        None => false,
        Some(&"log") => true,
        Some(other) => return Err(format!("unknown spacing `{other}` (only `log`)")),
    };
    Ok(AxisSpec {
        kind,
        min,
        max,
        count,
        log,
    })
}

/// `min:max:count` screen or frequency range (plain SI numbers).
pub fn parse_range(s: &str) -> Result<(f64, f64, usize), String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("range `{s}` must be min:max:count"));
    }
    let min: f64 = parts[0].parse().map_err(|_| format!("bad min in `{s}`"))?;
    let max: f64 = parts[1].parse().map_err(|_| format!("bad max in `{s}`"))?;
    let count: usize = parts[2].parse().map_err(|_| format!("bad count in `{s}`"))?;
    if count < 2 || min.is_nan() || max.is_nan() || min >= max {
        return Err(format!("range `{s}` needs min < max and count >= 2"));
    }
    Ok((min, max, count))
}

/// `T,d,t` triple with unit suffixes allowed per component.
pub fn parse_point(s: &str) -> Result<(f64, f64, f64), String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(format!("point `{s}` must be T,d,t"));
    }
    Ok((
        parse_temperature(parts[0])?,
        parse_length(parts[1])?,
        parse_time(parts[2])?,
    ))
}

pub fn linspace(min: f64, max: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| min + (max - min) * i as f64 / (count - 1) as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_suffixes() {
        assert_eq!(parse_length("1um").unwrap(), 1e-6);
        assert!((parse_length("250nm").unwrap() / 2.5e-7 - 1.0).abs() < 1e-15);
        assert_eq!(parse_length("1e-6").unwrap(), 1e-6);
        assert_eq!(parse_time("10ms").unwrap(), 1e-2);
        assert_eq!(parse_time("2e-3").unwrap(), 2e-3);
        assert_eq!(parse_temperature("2500K").unwrap(), 2500.0);
        assert_eq!(parse_temperature("2500").unwrap(), 2500.0);
        assert!(parse_length("abc").is_err());
    }

    #[test]
    fn grid_axis_syntax() {
        let a = parse_axis("T:0:3000:60").unwrap();
        assert_eq!(a.kind.name(), "T");
        assert_eq!(a.count, 60);
        assert!(!a.log);
        let b = parse_axis("d:2e-8:1e-6:30:log").unwrap();
        assert!(b.log);
        assert!(parse_axis("q:0:1:5").is_err());
        assert!(parse_axis("T:0:1").is_err());
    }

    #[test]
    fn point_syntax() {
        let (t, d, tt) = parse_point("2500K,1um,10ms").unwrap();
        assert_eq!((t, d, tt), (2500.0, 1e-6, 1e-2));
    }
}
