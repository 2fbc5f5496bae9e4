//! Touchstone v1 (`.s1p` / `.s2p`) reading and writing.

use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::netcore::{mag_2_db, FreqUnit, Frequency, SMatrixArray, DEFAULT_Z0};

/// Number format of the data columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataFormat {
    /// Real, imaginary.
    Ri,
    /// Magnitude, angle in degrees.
    Ma,
    /// `20·log10` magnitude, angle in degrees.
    Db,
}

impl DataFormat {
    pub const NAMES: [&'static str; 3] = ["RI", "MA", "DB"];

    fn encode(self, z: Complex64) -> (f64, f64) {
        match self {
            DataFormat::Ri => (z.re, z.im),
            DataFormat::Ma => (z.norm(), z.arg().to_degrees()),
            DataFormat::Db => (mag_2_db(z.norm()), z.arg().to_degrees()),
        }
    }

    fn decode(self, a: f64, b: f64) -> Complex64 {
        match self {
            DataFormat::Ri => Complex64::new(a, b),
            DataFormat::Ma => Complex64::from_polar(a, b.to_radians()),
            DataFormat::Db => Complex64::from_polar(10f64.powf(a / 20.0), b.to_radians()),
        }
    }
}

impl FromStr for DataFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "RI" => Ok(DataFormat::Ri),
            "MA" => Ok(DataFormat::Ma),
            "DB" => Ok(DataFormat::Db),
            _ => Err(Error::unknown_name("data format", s, &Self::NAMES)),
        }
    }
}

impl fmt::Display for DataFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DataFormat::Ri => "RI",
            DataFormat::Ma => "MA",
            DataFormat::Db => "DB",
        })
    }
}

/// Tabulated S-parameters of a 1- or 2-port.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasuredNetwork {
    pub freq: Frequency,
    pub s: SMatrixArray,
    /// Unit and format of the option line the data was read with.
    pub unit: FreqUnit,
    pub format: DataFormat,
    pub source: Option<PathBuf>,
    /// Non-fatal issues found while parsing.
    pub warnings: Vec<String>,
}

impl MeasuredNetwork {
    pub fn new(freq: Frequency, s: SMatrixArray) -> Result<Self> {
        if freq.len() != s.len() {
            return Err(Error::LengthMismatch {
                left: freq.len(),
                right: s.len(),
            });
        }
        if !(1..=2).contains(&s.ports()) {
            return Err(Error::PortMismatch {
                expected: 2,
                got: s.ports(),
            });
        }
        if s.data().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidModel("S data contains non-finite entries".into()));
        }
        Ok(Self {
            freq,
            s,
            unit: FreqUnit::GHz,
            format: DataFormat::Ma,
            source: None,
            warnings: Vec::new(),
        })
    }

    pub fn ports(&self) -> usize {
        self.s.ports()
    }

    pub fn z0(&self) -> f64 {
        self.s.z0()
    }
}

/// Port count implied by a `.s1p` / `.s2p` extension.
pub fn ports_from_extension(path: &Path) -> Result<usize> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase());
    match ext.as_deref() {
        Some("s1p") => Ok(1),
        Some("s2p") => Ok(2),
        _ => Err(Error::Config(format!(
            "{}: expected a .s1p or .s2p file",
            path.display()
        ))),
    }
}

pub fn read_touchstone(path: impl AsRef<Path>) -> Result<MeasuredNetwork> {
    let path = path.as_ref();
    let ports = ports_from_extension(path)?;
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut net = parse_touchstone(&text, ports, path)?;
    net.source = Some(path.to_path_buf());
    Ok(net)
}

struct Options {
    unit: FreqUnit,
    format: DataFormat,
    z0: f64,
}

fn parse_option_line(rest: &str, path: &Path, line: usize) -> Result<Options> {
    let err = |msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let mut opts = Options {
        unit: FreqUnit::GHz,
        format: DataFormat::Ma,
        z0: DEFAULT_Z0,
    };
    let mut tokens = rest.split_whitespace();
    while let Some(tok) = tokens.next() {
        let upper = tok.to_ascii_uppercase();
        match upper.as_str() {
            "HZ" | "KHZ" | "MHZ" | "GHZ" => opts.unit = tok.parse()?,
            "RI" | "MA" | "DB" => opts.format = tok.parse()?,
            "S" => {}
            "Y" | "Z" | "H" | "G" => {
                return Err(err(format!("only S parameters are supported, got `{tok}`")))
            }
            "R" => {
                let v = tokens
                    .next()
                    .ok_or_else(|| err("`R` without a reference impedance".into()))?;
                let z0: f64 = v
                    .parse()
                    .map_err(|_| err(format!("invalid reference impedance `{v}`")))?;
                if !(z0 > 0.0 && z0.is_finite()) {
                    return Err(err(format!("reference impedance must be positive, got {v}")));
                }
                opts.z0 = z0;
            }
            _ => return Err(err(format!("unknown option `{tok}`"))),
        }
    }
    Ok(opts)
}

/// Parses Touchstone v1 text; `path` is only used in messages.
pub fn parse_touchstone(text: &str, ports: usize, path: &Path) -> Result<MeasuredNetwork> {
    if !(1..=2).contains(&ports) {
        return Err(Error::PortMismatch {
            expected: 2,
            got: ports,
        });
    }
    let per_row = 1 + 2 * ports * ports;
    let mut options: Option<Options> = None;
    let mut warnings = Vec::new();
    let mut rows: Vec<(usize, Vec<f64>)> = Vec::new();
    let mut pending: Vec<f64> = Vec::new();
    let mut pending_line = 0;

    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.split('!').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if options.is_some() {
                warnings.push(format!(
                    "{}:{line_no}: extra option line ignored",
                    path.display()
                ));
            } else if !rows.is_empty() || !pending.is_empty() {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: line_no,
                    msg: "option line after data".into(),
                });
            } else {
                options = Some(parse_option_line(rest, path, line_no)?);
            }
            continue;
        }
        if pending.is_empty() {
            pending_line = line_no;
        }
        for tok in line.split_whitespace() {
            let v: f64 = tok.parse().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                line: line_no,
                msg: format!("malformed number `{tok}`"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: line_no,
                    msg: format!("non-finite value `{tok}`"),
                });
            }
            pending.push(v);
        }
        // 1- and 2-port rows always fit on one line in v1
        if pending.len() != per_row {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: pending_line,
                msg: format!(
                    "expected {per_row} values for a {ports}-port row, got {}",
                    pending.len()
                ),
            });
        }
        rows.push((pending_line, std::mem::take(&mut pending)));
    }

    let opts = options.unwrap_or_else(|| {
        warnings.push(format!(
            "{}: no option line; assuming `# GHz S MA R 50`",
            path.display()
        ));
        Options {
            unit: FreqUnit::GHz,
            format: DataFormat::Ma,
            z0: DEFAULT_Z0,
        }
    });
    if rows.is_empty() {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: text.lines().count(),
            msg: "no data rows".into(),
        });
    }

    let k = opts.unit.factor();
    let mut f = Vec::with_capacity(rows.len());
    let mut data = Vec::with_capacity(rows.len() * ports * ports);
    for (line, row) in &rows {
        let fk = row[0] * k;
        if fk < 0.0 {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: *line,
                msg: format!("negative frequency {}", row[0]),
            });
        }
        if let Some(&prev) = f.last() {
            if fk <= prev {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: *line,
                    msg: format!("frequency {} is not above the previous row", row[0]),
                });
            }
        }
        f.push(fk);
        let z: Vec<Complex64> = row[1..]
            .chunks(2)
            .map(|p| opts.format.decode(p[0], p[1]))
            .collect();
        if ports == 1 {
            data.push(z[0]);
        } else {
            // v1 column order is S11, S21, S12, S22
            data.extend([z[0], z[2], z[1], z[3]]);
        }
    }
    let freq = Frequency::from_hz(f)?;
    let s = SMatrixArray::new(ports, data, opts.z0)?;
    let mut net = MeasuredNetwork::new(freq, s)?;
    net.unit = opts.unit;
    net.format = opts.format;
    net.warnings = warnings;
    Ok(net)
}

/// Renders Touchstone v1 text with 16 significant digits.
pub fn format_touchstone(s: &SMatrixArray, freq: &Frequency, format: DataFormat, unit: FreqUnit) -> Result<String> {
    if s.len() != freq.len() {
        return Err(Error::LengthMismatch {
            left: s.len(),
            right: freq.len(),
        });
    }
    let ports = s.ports();
    if !(1..=2).contains(&ports) {
        return Err(Error::PortMismatch {
            expected: 2,
            got: ports,
        });
    }
    let mut out = String::new();
    writeln!(out, "! {ports}-port S-parameters written by rffit").unwrap();
    writeln!(out, "# {unit} S {format} R {}", s.z0()).unwrap();
    let order: &[(usize, usize)] = if ports == 1 {
        &[(0, 0)]
    } else {
        &[(0, 0), (1, 0), (0, 1), (1, 1)]
    };
    let k = unit.factor();
    for (idx, &fh) in freq.f().iter().enumerate() {
        write!(out, "{:.15e}", fh / k).unwrap();
        for &(i, j) in order {
            let (a, b) = format.encode(s.get(idx, i, j));
            write!(out, " {a:.15e} {b:.15e}").unwrap();
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn write_touchstone(
    path: impl AsRef<Path>,
    s: &SMatrixArray,
    freq: &Frequency,
    format: DataFormat,
    unit: FreqUnit,
) -> Result<()> {
    let path = path.as_ref();
    let expected = ports_from_extension(path)?;
    if expected != s.ports() {
        return Err(Error::PortMismatch {
            expected,
            got: s.ports(),
        });
    }
    let text = format_touchstone(s, freq, format, unit)?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str, ports: usize) -> Result<MeasuredNetwork> {
        parse_touchstone(text, ports, Path::new("t.s2p"))
    }

    #[test]
    fn ma_row_uses_s21_before_s12() {
        let n = parse("# MHz S MA R 50\n100 0.5 0 0.1 90 0.1 90 0.5 0\n", 2).unwrap();
        assert_eq!(n.freq.f(), &[1e8]);
        let close = |a: Complex64, b: Complex64| (a - b).norm() < 1e-15;
        assert!(close(n.s.get(0, 0, 0), Complex64::new(0.5, 0.0)));
        assert!(close(n.s.get(0, 1, 0), Complex64::new(0.0, 0.1)));
        assert!(close(n.s.get(0, 0, 1), Complex64::new(0.0, 0.1)));
        assert!(close(n.s.get(0, 1, 1), Complex64::new(0.5, 0.0)));
    }

    #[test]
    fn ri_row_and_comments() {
        let text = "! header\n# hz s ri r 75 ! trailing\n1 0.3 0.4 ! comment\n";
        let n = parse(text, 1).unwrap();
        assert_eq!(n.s.get(0, 0, 0), Complex64::new(0.3, 0.4));
        assert_eq!(n.z0(), 75.0);
        assert!(n.warnings.is_empty());
    }

    #[test]
    fn missing_option_line_warns_and_uses_defaults() {
        let n = parse("1 1 180\n", 1).unwrap();
        assert_eq!(n.freq.f(), &[1e9]);
        assert!((n.s.get(0, 0, 0) - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
        assert_eq!(n.warnings.len(), 1);
    }

    #[test]
    fn db_format() {
        let n = parse("# GHz S DB R 50\n1 -20 0\n", 1).unwrap();
        assert!((n.s.get(0, 0, 0).re - 0.1).abs() < 1e-15);
    }

    #[test]
    fn malformed_row_reports_line() {
        let err = parse("# MHz S RI R 50\n! c\n1 0.1 0.2\n2 0.1 x\n", 1).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 4, .. }), "{err}");
        let err = parse("# MHz S RI R 50\n1 0.1 0.2 0.3\n", 1).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn non_monotone_frequency_rejected() {
        let err = parse("# MHz S RI R 50\n2 0 0\n1 0 0\n", 1).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        assert!(parse("# MHz S RI R 50\n1 0 0\n1 0 0\n", 1).is_err());
    }

    #[test]
    fn bad_options_rejected() {
        assert!(parse("# MHz Y RI R 50\n1 0 0\n", 1).is_err());
        assert!(parse("# MHz S XY R 50\n1 0 0\n", 1).is_err());
        assert!(parse("# MHz S RI R -5\n1 0 0\n", 1).is_err());
    }

    #[test]
    fn extension_sets_port_count() {
        assert_eq!(ports_from_extension(Path::new("a.S2P")).unwrap(), 2);
        assert_eq!(ports_from_extension(Path::new("a.s1p")).unwrap(), 1);
        assert!(ports_from_extension(Path::new("a.txt")).is_err());
    }

    #[test]
    fn one_port_write_has_three_columns() {
        let f = Frequency::new(1.0, 2.0, 2, "GHz").unwrap();
        let s = SMatrixArray::from_one_port(vec![Complex64::new(0.1, 0.2); 2], 50.0).unwrap();
        let text = format_touchstone(&s, &f, DataFormat::Ri, FreqUnit::GHz).unwrap();
        let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with(['!', '#'])).collect();
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|r| r.split_whitespace().count() == 3));
    }

    #[test]
    fn format_round_trip() {
        let f = Frequency::new(0.0, 3.0, 4, "GHz").unwrap();
        let data: Vec<Complex64> = (0..16)
            .map(|i| Complex64::from_polar(0.05 + 0.05 * i as f64, 0.3 * i as f64 - 2.0))
            .collect();
        let s = SMatrixArray::new(2, data, 50.0).unwrap();
        for fmt in [DataFormat::Ri, DataFormat::Ma, DataFormat::Db] {
            let text = format_touchstone(&s, &f, fmt, FreqUnit::MHz).unwrap();
            let n = parse(&text, 2).unwrap();
            assert_eq!(n.format, fmt);
            for (a, b) in n.s.data().iter().zip(s.data()) {
                assert!((a - b).norm() <= 1e-12 * b.norm(), "{fmt}: {a} vs {b}");
            }
            for (a, b) in n.freq.f().iter().zip(f.f()) {
                assert!((a - b).abs() <= 1e-12 * b.abs());
            }
        }
    }
}
