//! Textual state format: a header `dims: d1 d2 ...` followed by the
//! row-major matrix entries as whitespace-separated `re im` pairs.
//! Language-neutral and diffable; the writer emits one matrix row per
//! line with round-trip-exact floats.

use std::path::Path;

use padec_core::qops::{CMatrix, DensityOperator, C64};

pub fn write_state(rho: &DensityOperator) -> String {
    let dims: Vec<String> = rho.dims().iter().map(|d| d.to_string()).collect();
    let mut out = format!("dims: {}\n", dims.join(" "));
    let d = rho.dim();
    for i in 0..d {
        let mut row = Vec::with_capacity(2 * d);
        for j in 0..d {
            let z = rho.mat()[(i, j)];
            row.push(format!("{} {}", z.re, z.im));
        }
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

pub fn parse_state(text: &str) -> Result<DensityOperator, String> {
    let mut lines = text.lines();
    let header = lines.next().ok_or("empty state file")?;
    let rest = header.strip_prefix("dims:").ok_or("first line must start with `dims:`")?;
    let dims: Result<Vec<usize>, _> =
        rest.split_whitespace().map(|t| t.parse::<usize>()).collect();
    let dims = dims.map_err(|e| format!("bad dims header: {e}"))?;
    if dims.is_empty() || dims.contains(&0) {
        return Err("dims must be positive integers".into());
    }
    let d: usize = dims.iter().product();

    let numbers: Result<Vec<f64>, _> = lines
        .flat_map(|l| l.split_whitespace())
        .map(|t| t.parse::<f64>())
        .collect();
    let numbers = numbers.map_err(|e| format!("bad matrix entry: {e}"))?;
    if numbers.len() != 2 * d * d {
        return Err(format!(
            "expected {} re/im values for a {d}x{d} matrix, found {}",
            2 * d * d,
            numbers.len()
        ));
    }
    let mat = CMatrix::from_fn(d, d, |i, j| {
        let k = 2 * (i * d + j);
        C64::new(numbers[k], numbers[k + 1])
    });
    DensityOperator::new(mat, dims).map_err(|e| format!("invalid state: {e}"))
}

pub fn read_state(path: &Path) -> Result<DensityOperator, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    parse_state(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use padec_core::qops::{random_density, SeededRng};

    #[test]
    fn round_trip_preserves_entries() {
        let mut rng = SeededRng::new(5);
        let rho = random_density(6, 4, &mut rng).unwrap().with_dims(vec![2, 3]).unwrap();
        let text = write_state(&rho);
        let back = parse_state(&text).unwrap();
        assert_eq!(back.dims(), rho.dims());
        assert!((back.mat() - rho.mat()).norm() == 0.0, "writer must be lossless");
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(parse_state("").is_err());
        assert!(parse_state("dims: 2\n1 0 0 0\n").is_err()); // too few entries
        assert!(parse_state("dims: 2\n1 0 0 0 0 0 oops 0\n").is_err());
        // valid shape but not a state (trace 2)
        let bad = "dims: 2\n1 0 0 0\n0 0 1 0\n";
        assert!(parse_state(bad).unwrap_err().contains("invalid state"));
    }
}
