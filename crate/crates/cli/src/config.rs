use std::fmt;
use std::path::{Path, PathBuf};

use mimetic_core::cases::Case;
use serde::Deserialize;

/// Invalid invocation; reported with exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Optional settings file. Every key mirrors a command-line flag; flags
/// take precedence.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub case: Option<String>,
    pub elements: Option<Vec<usize>>,
    pub degree: Option<usize>,
    pub degrees: Option<Vec<usize>>,
    pub resolution: Option<usize>,
    pub out: Option<PathBuf>,
    pub paper_size: Option<bool>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, UsageError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| UsageError(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| UsageError(format!("invalid config {}: {e}", path.display())))
    }
}

/// Raw flag values before merging.
#[derive(Debug, Default, Clone)]
pub struct Flags {
    pub case: Option<String>,
    pub elements: Option<Vec<usize>>,
    pub degree: Option<usize>,
    pub degrees: Option<Vec<usize>>,
    pub resolution: Option<usize>,
    pub out: Option<PathBuf>,
    pub paper_size: bool,
    pub config: Option<PathBuf>,
}

/// Validated settings for one `solve` run.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveConfig {
    pub case: Case,
    pub elements: usize,
    pub degree: usize,
    /// Sampling intervals per direction; the grid has `resolution + 1` points.
    pub resolution: usize,
    pub out: PathBuf,
    pub paper_size: bool,
}

/// Validated settings for one `converge` sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergeConfig {
    pub case: Case,
    pub elements: Vec<usize>,
    pub degrees: Vec<usize>,
    pub out: PathBuf,
}

/// Largest degree accepted; higher orders lose accuracy in the 1D bases.
pub const MAX_DEGREE: usize = 12;

fn merged(flags: &Flags) -> Result<FileConfig, UsageError> {
    let file = match &flags.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    Ok(FileConfig {
        case: flags.case.clone().or(file.case),
        elements: flags.elements.clone().or(file.elements),
        degree: flags.degree.or(file.degree),
        degrees: flags.degrees.clone().or(file.degrees),
        resolution: flags.resolution.or(file.resolution),
        out: flags.out.clone().or(file.out),
        paper_size: Some(flags.paper_size || file.paper_size.unwrap_or(false)),
    })
}

fn parse_case(name: Option<&str>, default: Case) -> Result<Case, UsageError> {
    match name {
        Some(s) => s.parse().map_err(|e: mimetic_core::Error| UsageError(e.to_string())),
        None => Ok(default),
    }
}

fn check_degree(n: usize) -> Result<(), UsageError> {
    if n == 0 || n > MAX_DEGREE {
        return Err(UsageError(format!("degree must be in 1..={MAX_DEGREE}, got {n}")));
    }
    Ok(())
}

fn check_elements(k: usize) -> Result<(), UsageError> {
    if k == 0 {
        return Err(UsageError("element counts must be positive".into()));
    }
    Ok(())
}

impl SolveConfig {
    pub fn resolve(flags: &Flags) -> Result<Self, UsageError> {
        let m = merged(flags)?;
        let case = parse_case(m.case.as_deref(), Case::Lid2d)?;
        let paper_size = m.paper_size.unwrap_or(false);
        let (mut elements, mut degree) = match case {
            Case::Lid2d => (2, 8),
            Case::Lid3d => (2, 4),
            Case::Trig3d => (2, 3),
            Case::Manufactured2d | Case::Trig2d => (4, 3),
        };
        if paper_size {
            if !matches!(case, Case::Lid2d | Case::Lid3d) {
                return Err(UsageError("--paper-size applies to the lid-driven cases only".into()));
            }
            degree = 8;
        }
        match m.elements.as_deref() {
            None => {}
            Some([k]) => elements = *k,
            Some([]) => return Err(UsageError("--elements needs a value".into())),
            Some(_) => return Err(UsageError("solve takes a single element count".into())),
        }
        if let Some(n) = m.degree {
            if paper_size && n != 8 {
                return Err(UsageError("--paper-size fixes the degree at 8".into()));
            }
            degree = n;
        }
        check_elements(elements)?;
        check_degree(degree)?;
        let resolution = m.resolution.unwrap_or(if case.dim() == 2 { 49 } else { 19 });
        if resolution == 0 {
            return Err(UsageError("resolution must be positive".into()));
        }
        Ok(Self {
            case,
            elements,
            degree,
            resolution,
            out: m.out.unwrap_or_else(|| PathBuf::from("out")),
            paper_size,
        })
    }
}

impl ConvergeConfig {
    pub fn resolve(flags: &Flags) -> Result<Self, UsageError> {
        let m = merged(flags)?;
        let case = parse_case(m.case.as_deref(), Case::Manufactured2d)?;
        if case.exact().is_none() {
            return Err(UsageError(format!(
                "case {case} has no exact solution to converge against"
            )));
        }
        let elements = m.elements.unwrap_or_else(|| vec![2, 4, 8, 16]);
        if elements.is_empty() {
            return Err(UsageError("element list is empty".into()));
        }
        let degrees = match (m.degrees, m.degree) {
            (Some(d), _) => d,
            (None, Some(n)) => vec![n],
            (None, None) => vec![2, 3],
        };
        if degrees.is_empty() {
            return Err(UsageError("degree list is empty".into()));
        }
        elements.iter().try_for_each(|&k| check_elements(k))?;
        degrees.iter().try_for_each(|&n| check_degree(n))?;
        Ok(Self {
            case,
            elements,
            degrees,
            out: m.out.unwrap_or_else(|| PathBuf::from("out")),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_overrides() {
        let c = SolveConfig::resolve(&Flags::default()).unwrap();
        assert_eq!((c.case, c.elements, c.degree, c.resolution), (Case::Lid2d, 2, 8, 49));
        let flags = Flags {
            case: Some("lid3d".into()),
            paper_size: true,
            ..Default::default()
        };
        let c = SolveConfig::resolve(&flags).unwrap();
        assert_eq!((c.elements, c.degree), (2, 8));
        let flags = Flags {
            case: Some("manufactured2d".into()),
            paper_size: true,
            ..Default::default()
        };
        assert!(SolveConfig::resolve(&flags).is_err());
    }

    #[test]
    fn flags_override_file() {
        let dir = std::env::temp_dir().join(format!("mimetic-cfg-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("c.json");
        std::fs::write(&path, r#"{"case": "manufactured2d", "elements": [8], "degree": 2}"#).unwrap();
        let flags = Flags {
            degree: Some(4),
            config: Some(path.clone()),
            ..Default::default()
        };
        let c = SolveConfig::resolve(&flags).unwrap();
        assert_eq!((c.case, c.elements, c.degree), (Case::Manufactured2d, 8, 4));
        std::fs::write(&path, r#"{"cases": "lid2d"}"#).unwrap();
        assert!(SolveConfig::resolve(&flags).is_err());
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn converge_rejects_bad_lists() {
        let flags = Flags {
            elements: Some(vec![]),
            ..Default::default()
        };
        assert!(ConvergeConfig::resolve(&flags).is_err());
        let flags = Flags {
            case: Some("lid2d".into()),
            ..Default::default()
        };
        assert!(ConvergeConfig::resolve(&flags).is_err());
        let flags = Flags {
            degrees: Some(vec![0]),
            ..Default::default()
        };
        assert!(ConvergeConfig::resolve(&flags).is_err());
    }
}
