//! Numeric grids written as explicit lists, comma-separated strings or
//! inclusive `start:stop:step` ranges.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Upper bound on the number of points a range may expand to.
pub const MAX_POINTS: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridRepr", into = "Vec<f64>")]
pub struct Grid(Vec<f64>);

#[derive(Deserialize)]
#[serde(untagged)]
enum GridRepr {
    List(Vec<f64>),
    Text(String),
}

impl TryFrom<GridRepr> for Grid {
    type Error = String;

    fn try_from(repr: GridRepr) -> Result<Self, String> {
        match repr {
            GridRepr::List(v) => Ok(Grid(v)),
            GridRepr::Text(s) => s.parse(),
        }
    }
}

impl From<Grid> for Vec<f64> {
    fn from(g: Grid) -> Self {
        g.0
    }
}

impl Grid {
    pub fn new(points: Vec<f64>) -> Self {
        Grid(points)
    }

    pub fn points(&self) -> &[f64] {
        &self.0
    }

    /// Inclusive range; `stop` is kept when it lies on the lattice to
    /// within 1e-9 steps.
    pub fn range(start: f64, stop: f64, step: f64) -> Result<Self, String> {
        if !(start.is_finite() && stop.is_finite() && step.is_finite()) {
            return Err("range bounds and step must be finite".into());
        }
        if !(step > 0.0) {
            return Err(format!("range step must be positive, got {step}"));
        }
        if stop < start {
            return Err(format!("range stop {stop} is below start {start}"));
        }
        let span = (stop - start) / step;
        if !(span < MAX_POINTS as f64) {
            return Err(format!("range expands past {MAX_POINTS} points"));
        }
        let count = (span + 1e-9).floor() as usize + 1;
        Ok(Grid((0..count).map(|i| start + i as f64 * step).collect()))
    }
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        let number = |x: &str| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| format!("{:?} is not a number", x.trim()))
        };
        if s.contains(':') {
            let parts: Vec<&str> = s.split(':').collect();
            let [a, b, c] = parts[..] else {
                return Err(format!("range {s:?} must read start:stop:step"));
            };
            return Grid::range(number(a)?, number(b)?, number(c)?);
        }
        let s = s.trim_start_matches('[').trim_end_matches(']');
        if s.trim().is_empty() {
            return Ok(Grid(Vec::new()));
        }
        s.split(',').map(number).collect::<Result<Vec<_>, _>>().map(Grid)
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|x| x.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forms() {
        assert_eq!(
            "0:100:25".parse::<Grid>().unwrap().points(),
            &[0.0, 25.0, 50.0, 75.0, 100.0]
        );
        assert_eq!("0:0.3:0.1".parse::<Grid>().unwrap().points().len(), 4);
        assert_eq!("40, 70,170".parse::<Grid>().unwrap().points(), &[40.0, 70.0, 170.0]);
        assert_eq!("[1,2]".parse::<Grid>().unwrap().points(), &[1.0, 2.0]);
        assert!("".parse::<Grid>().unwrap().points().is_empty());
        for bad in ["1:2", "1:2:0", "2:1:1", "a,b", "0:1e300:1e-300", "1:2:3:4", "0:inf:1"] {
            assert!(bad.parse::<Grid>().is_err(), "{bad}");
        }
    }

    #[test]
    fn display_parses_back() {
        let g = Grid::new(vec![0.0, 1e-7, 2.5, 1e21]);
        assert_eq!(g.to_string().parse::<Grid>().unwrap(), g);
    }
}
