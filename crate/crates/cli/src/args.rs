//! Command-line arguments and the small text formats they use.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use evanskit::C64;

#[derive(Parser, Debug)]
#[command(name = "evanskit", version, about = "Evans determinants, Jost solutions and Fredholm determinants")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Compare det2(I + K) with e^Theta D at one spectral parameter.
    Verify(VerifyArgs),
    /// Run the full pipeline over a grid of spectral parameters.
    Scan(ScanArgs),
    /// Count zeros of D inside a circle by the argument principle.
    Count(CountArgs),
    /// Solve for one Jost solution and report it.
    Jost(JostArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RouteArg {
    Volterra,
    Weighted,
    Mixed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SideArg {
    Plus,
    Minus,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Problem configuration (JSON).
    #[arg(long)]
    pub problem: PathBuf,
    /// Truncation point X; defaults from the decay of the perturbation.
    #[arg(long = "X", value_name = "REAL")]
    pub x_max: Option<f64>,
    /// Approximate number of Nyström nodes.
    #[arg(long, default_value_t = 800)]
    pub nodes: usize,
    /// Tolerance on the relative identity residual.
    #[arg(long, default_value_t = 1e-4)]
    pub tol: f64,
    /// Worker threads for scans.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Evaluate Schrödinger problems with real k at k + 1e-6 i.
    #[arg(long = "continuity-flag")]
    pub continuity: bool,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: Common,
    /// Spectral parameter, e.g. `0+2i`.
    #[arg(long, allow_hyphen_values = true)]
    pub k: Option<String>,
    #[arg(long, value_enum)]
    pub route: Option<RouteArg>,
}

#[derive(Args, Debug)]
pub struct ScanArgs {
    #[command(flatten)]
    pub common: Common,
    /// `A:B:N` for N evenly spaced points from A to B, or `z1;z2;...`.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: String,
    #[arg(long, value_enum)]
    pub route: Option<RouteArg>,
}

#[derive(Args, Debug)]
pub struct CountArgs {
    #[command(flatten)]
    pub common: Common,
    /// `cx,cy,r,n`: circle about cx + i cy of radius r sampled at n points.
    #[arg(long, allow_hyphen_values = true)]
    pub contour: String,
    /// Largest number of contour points after refinement.
    #[arg(long, default_value_t = 1024)]
    pub max_points: usize,
}

#[derive(Args, Debug)]
pub struct JostArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, allow_hyphen_values = true)]
    pub k: Option<String>,
    #[arg(long, value_enum)]
    pub route: RouteArg,
    #[arg(long, value_enum, default_value_t = SideArg::Plus)]
    pub side: SideArg,
    /// Projection index for the mixed route, counted from 1.
    #[arg(long)]
    pub index: Option<usize>,
}

/// Parses `a+bi`, `a-bi`, `bi`, `a`, `i` and `-i`.
pub fn parse_complex(text: &str) -> Result<C64, String> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || format!("cannot read {text:?} as a complex number");
    if s.is_empty() {
        return Err(bad());
    }
    let Some(body) = s.strip_suffix('i') else {
        return s.parse::<f64>().map(|re| C64::new(re, 0.0)).map_err(|_| bad());
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len()).rev().find(|&i| matches!(bytes[i], b'+' | b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(i) => (&body[..i], &body[i..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => "1",
        "-" => "-1",
        other => other,
    };
    let re: f64 = re.parse().map_err(|_| bad())?;
    let im: f64 = im.parse().map_err(|_| bad())?;
    Ok(C64::new(re, im))
}

/// Grid of spectral parameters; see [`ScanArgs::grid`].
pub fn parse_grid(text: &str) -> Result<Vec<C64>, String> {
    let text = text.trim();
    if text.is_empty() {
        return Ok(Vec::new());
    }
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        let [a, b, n] = parts.as_slice() else {
            return Err(format!("grid {text:?} is not of the form A:B:N"));
        };
        let (a, b) = (parse_complex(a)?, parse_complex(b)?);
        let n: usize = n.trim().parse().map_err(|_| format!("grid point count {n:?} is not a nonnegative integer"))?;
        return Ok(match n {
            0 => Vec::new(),
            1 => vec![a],
            _ => (0..n).map(|i| a + (b - a) * (i as f64 / (n - 1) as f64)).collect(),
        });
    }
    text.split(';').map(parse_complex).collect()
}

/// Circle `(center, radius, points)` from `cx,cy,r,n`.
pub fn parse_contour(text: &str) -> Result<(C64, f64, usize), String> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let [cx, cy, r, n] = parts.as_slice() else {
        return Err(format!("contour {text:?} is not of the form cx,cy,r,n"));
    };
    let num = |s: &str| s.parse::<f64>().map_err(|_| format!("contour entry {s:?} is not a number"));
    let (cx, cy, r) = (num(cx)?, num(cy)?, num(r)?);
    let n: usize = n.parse().map_err(|_| format!("contour point count {n:?} is not an integer"))?;
    if !(r > 0.0 && r.is_finite()) || !cx.is_finite() || !cy.is_finite() {
        return Err("contour needs a finite center and a positive radius".into());
    }
    if n < 8 {
        return Err(format!("contour needs at least 8 points, got {n}"));
    }
    Ok((C64::new(cx, cy), r, n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_forms() {
        assert_eq!(parse_complex("0+2i").unwrap(), C64::new(0.0, 2.0));
        assert_eq!(parse_complex("1.5").unwrap(), C64::new(1.5, 0.0));
        assert_eq!(parse_complex("-0.3-1e-2i").unwrap(), C64::new(-0.3, -0.01));
        assert_eq!(parse_complex("2i").unwrap(), C64::new(0.0, 2.0));
        assert_eq!(parse_complex("-i").unwrap(), C64::new(0.0, -1.0));
        assert_eq!(parse_complex("1e-3+2E+1i").unwrap(), C64::new(1e-3, 20.0));
        assert!(parse_complex("2j").is_err());
        assert!(parse_complex("").is_err());
    }

    #[test]
    fn grids() {
        let g = parse_grid("0+1.2i:0+3i:10").unwrap();
        assert_eq!(g.len(), 10);
        assert_eq!(g[9], C64::new(0.0, 3.0));
        assert!(parse_grid("").unwrap().is_empty());
        assert!(parse_grid("1:2:0").unwrap().is_empty());
        assert_eq!(parse_grid("1;2i").unwrap(), vec![C64::new(1.0, 0.0), C64::new(0.0, 2.0)]);
        assert!(parse_grid("1:2").is_err());
    }

    #[test]
    fn contours() {
        assert_eq!(parse_contour("0,1,0.3,16").unwrap(), (C64::new(0.0, 1.0), 0.3, 16));
        assert!(parse_contour("0,1,0.3,4").is_err());
        assert!(parse_contour("0,1,-1,16").is_err());
    }
}
