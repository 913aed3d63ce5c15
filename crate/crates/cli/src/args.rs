//! Parsers for the compact flag syntaxes (schedules, grids, integrands).

use anyhow::{anyhow, bail, Context, Result};
use equidist::{dyadic_grid, Endpoints, IntegrandSpec, IntervalQuery, UnitPoint, MAX_PRECISION};

/// Increasing list of prefix lengths.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Schedule(pub Vec<usize>);

/// `100,1000,1e4` -> `[100, 1000, 10000]`.
pub fn parse_schedule(s: &str) -> Result<Schedule> {
    s.split(',')
        .map(|part| parse_count(part.trim()))
        .collect::<Result<Vec<_>>>()
        .map(Schedule)
        .with_context(|| format!("bad schedule {s:?}"))
}

pub fn parse_count(s: &str) -> Result<usize> {
    if let Ok(n) = s.parse::<usize>() {
        return Ok(n);
    }
    let f: f64 = s.parse().map_err(|_| anyhow!("not a count: {s:?}"))?;
    if f < 0.0 || f.fract() != 0.0 || f > 1e15 {
        bail!("not a count: {s:?}");
    }
    Ok(f as usize)
}

/// `k/2^p` exactly, or a decimal rounded to the finest grid and reduced.
pub fn parse_point(s: &str) -> Result<UnitPoint> {
    let s = s.trim();
    if s.contains('/') {
        return Ok(s.parse()?);
    }
    let v: f64 = s.parse().map_err(|_| anyhow!("not a point: {s:?}"))?;
    Ok(UnitPoint::from_f64(v, MAX_PRECISION.min(52))?.reduced())
}

/// `dyadicK`, or explicit intervals `c:d,c:d,...`.
pub fn parse_grid(s: &str, endpoints: Endpoints) -> Result<Vec<IntervalQuery>> {
    if let Some(k) = s.strip_prefix("dyadic") {
        let parts: u32 = k.parse().map_err(|_| anyhow!("bad grid {s:?}"))?;
        let grid = dyadic_grid(parts)?;
        return grid
            .into_iter()
            .map(|q| Ok(IntervalQuery::with_endpoints(q.c(), q.d(), endpoints)?))
            .collect();
    }
    s.split(',')
        .map(|iv| {
            let (c, d) = iv
                .split_once(':')
                .ok_or_else(|| anyhow!("interval {iv:?} must look like c:d"))?;
            Ok(IntervalQuery::with_endpoints(
                parse_point(c)?,
                parse_point(d)?,
                endpoints,
            )?)
        })
        .collect()
}

/// Integrand shorthand:
/// `const:C`, `x`, `x^K`, `poly:c0,c1,...`, `sin:H`, `cos:H`,
/// `ind:c:d` (closed), `ind-ho:c:d` (half-open), or an inline JSON object.
pub fn parse_integrand(s: &str) -> Result<IntegrandSpec> {
    let s = s.trim();
    let spec = if s.starts_with('{') {
        serde_json::from_str(s).context("integrand JSON")?
    } else if s == "x" {
        IntegrandSpec::monomial(1)
    } else if let Some(k) = s.strip_prefix("x^") {
        IntegrandSpec::monomial(k.parse().map_err(|_| anyhow!("bad exponent in {s:?}"))?)
    } else if let Some(c) = s.strip_prefix("const:") {
        IntegrandSpec::constant(c.parse().map_err(|_| anyhow!("bad constant in {s:?}"))?)
    } else if let Some(cs) = s.strip_prefix("poly:") {
        let coeffs = cs
            .split(',')
            .map(|c| {
                c.trim()
                    .parse::<f64>()
                    .map_err(|_| anyhow!("bad coefficient {c:?}"))
            })
            .collect::<Result<Vec<_>>>()?;
        IntegrandSpec::Polynomial { coeffs }
    } else if let Some(h) = s.strip_prefix("sin:") {
        IntegrandSpec::sin(h.parse().map_err(|_| anyhow!("bad frequency in {s:?}"))?)
    } else if let Some(h) = s.strip_prefix("cos:") {
        IntegrandSpec::cos(h.parse().map_err(|_| anyhow!("bad frequency in {s:?}"))?)
    } else if let Some(iv) = s.strip_prefix("ind-ho:") {
        IntegrandSpec::indicator(parse_grid(iv, Endpoints::HalfOpen)?.remove(0))
    } else if let Some(iv) = s.strip_prefix("ind:") {
        IntegrandSpec::indicator(parse_grid(iv, Endpoints::Closed)?.remove(0))
    } else {
        bail!("unknown integrand {s:?}");
    };
    spec.validate()?;
    Ok(spec)
}
