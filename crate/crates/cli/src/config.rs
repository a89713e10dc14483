//! Optional TOML configuration whose keys mirror command-line flags.
//!
//! ```toml
//! [solve]
//! backend = "external"
//! timelimit = 60
//!
//! [gen]
//! size = "xs"
//! ```
//!
//! Keys of the table named after the subcommand become `--key value` flags
//! placed before the user's own flags, so flags given on the command line
//! win. `true` booleans become bare flags, `false` ones are dropped and
//! arrays are joined with commas.

use std::ffi::OsString;
use std::path::Path;

use crate::error::CliError;

fn scalar(path: &Path, key: &str, v: &toml::Value) -> Result<String, CliError> {
    match v {
        toml::Value::String(s) => Ok(s.clone()),
        toml::Value::Integer(i) => Ok(i.to_string()),
        toml::Value::Float(f) => Ok(f.to_string()),
        other => Err(CliError::Config {
            path: path.to_path_buf(),
            message: format!(
                "`{key}` must be a string, number, boolean or array of those, got {}",
                other.type_str()
            ),
        }),
    }
}

/// Flags for `command` from the config file at `path`.
pub fn flags_for(path: &Path, command: &str) -> Result<Vec<OsString>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| CliError::Config {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
    let Some(section) = table.get(command) else {
        return Ok(Vec::new());
    };
    let section = section.as_table().ok_or_else(|| CliError::Config {
        path: path.to_path_buf(),
        message: format!("`{command}` must be a table"),
    })?;
    let mut out = Vec::new();
    for (key, value) in section {
        let flag = format!("--{}", key.replace('_', "-"));
        match value {
            toml::Value::Boolean(true) => out.push(flag.into()),
            toml::Value::Boolean(false) => {}
            toml::Value::Array(items) => {
                let parts = items
                    .iter()
                    .map(|v| scalar(path, key, v))
                    .collect::<Result<Vec<_>, _>>()?;
                out.push(flag.into());
                out.push(parts.join(",").into());
            }
            v => {
                out.push(flag.into());
                out.push(scalar(path, key, v)?.into());
            }
        }
    }
    Ok(out)
}

/// Copy of `argv` with `extra` inserted right after the subcommand token.
pub fn inject(argv: &[OsString], command: &str, extra: Vec<OsString>) -> Vec<OsString> {
    let mut skip_value = false;
    let position = argv.iter().enumerate().skip(1).find_map(|(k, a)| {
        if skip_value {
            skip_value = false;
            return None;
        }
        if a == "--config" {
            skip_value = true;
            return None;
        }
        (a == command).then_some(k)
    });
    let Some(k) = position else {
        return argv.to_vec();
    };
    let mut out = argv[..=k].to_vec();
    out.extend(extra);
    out.extend_from_slice(&argv[k + 1..]);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_from_section() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        std::fs::write(
            &path,
            "[solve]\nbackend = \"external\"\ntimelimit = 60\nmax_units = 8\n[gen]\nseed = 3\n",
        )
        .unwrap();
        let flags: Vec<String> = flags_for(&path, "solve")
            .unwrap()
            .into_iter()
            .map(|s| s.into_string().unwrap())
            .collect();
        assert_eq!(
            flags,
            [
                "--backend",
                "external",
                "--max-units",
                "8",
                "--timelimit",
                "60"
            ]
        );
        assert!(flags_for(&path, "bench").unwrap().is_empty());
    }

    #[test]
    fn injects_after_subcommand() {
        let argv: Vec<OsString> = ["nbsplan", "--config", "solve", "solve", "x.json"]
            .map(OsString::from)
            .to_vec();
        let out = inject(&argv, "solve", vec!["--gap".into(), "0".into()]);
        let out: Vec<&str> = out.iter().map(|s| s.to_str().unwrap()).collect();
        assert_eq!(
            out,
            ["nbsplan", "--config", "solve", "solve", "--gap", "0", "x.json"]
        );
    }
}
