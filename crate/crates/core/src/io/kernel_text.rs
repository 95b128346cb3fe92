use std::path::Path;

use crate::error::{Error, Result};
use crate::image::Kernel;

/// Parses `"h w"` followed by `h` rows of `w` whitespace-separated reals.
pub fn parse_kernel(text: &str) -> Result<Kernel> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = lines.next().ok_or_else(|| Error::Parse("empty kernel file".into()))?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad kernel header '{header}'"))))
        .collect::<Result<_>>()?;
    let [h, w] = dims[..] else {
        return Err(Error::Parse(format!("kernel header must be 'h w', got '{header}'")));
    };
    let mut data = Vec::with_capacity(h * w);
    for row in 0..h {
        let line = lines.next().ok_or_else(|| Error::Parse(format!("kernel has fewer than {h} rows")))?;
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad kernel value '{t}'"))))
            .collect::<Result<_>>()?;
        if vals.len() != w {
            return Err(Error::Parse(format!("kernel row {row} has {} values, expected {w}", vals.len())));
        }
        data.extend(vals);
    }
    Kernel::new(w, h, data)
}

pub fn format_kernel(k: &Kernel) -> String {
    let mut s = format!("{} {}\n", k.height(), k.width());
    for y in 0..k.height() {
        let row: Vec<String> = (0..k.width()).map(|x| format!("{:.17e}", k.get(x, y))).collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
    s
}

pub fn read_kernel(path: impl AsRef<Path>) -> Result<Kernel> {
    parse_kernel(&std::fs::read_to_string(path)?)
}

pub fn write_kernel(path: impl AsRef<Path>, k: &Kernel) -> Result<()> {
    std::fs::write(path, format_kernel(k))?;
    Ok(())
}
