//! `--config FILE` support. The file holds `key = value` lines whose keys are
//! long flag names; they are spliced in right after the subcommand so that
//! flags given on the command line, which come later, win.

use std::path::Path;

use anyhow::{bail, Context, Result};

/// Flags that take no value; `key = true` enables them, `false` drops them.
const SWITCHES: &[&str] = &["pow2", "svg"];

pub fn parse_config(text: &str, origin: &Path) -> Result<Vec<String>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!("ConfigError: {}:{}: expected key = value", origin.display(), i + 1);
        };
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || key == "config" {
            bail!("ConfigError: {}:{}: bad key {key:?}", origin.display(), i + 1);
        }
        if SWITCHES.contains(&key) {
            match value {
                "true" | "1" | "yes" => out.push(format!("--{key}")),
                "false" | "0" | "no" => {}
                _ => bail!("ConfigError: {}:{}: {key} expects true or false", origin.display(), i + 1),
            }
        } else {
            out.push(format!("--{key}"));
            out.push(value.to_string());
        }
    }
    Ok(out)
}

/// Returns argv with the config file's flags inserted after the subcommand
/// and the `--config` option itself removed.
pub fn expand_args(args: Vec<String>) -> Result<Vec<String>> {
    let mut rest = Vec::with_capacity(args.len());
    let mut path = None;
    let mut it = args.into_iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            path = Some(it.next().context("ConfigError: --config needs a path")?);
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        } else {
            rest.push(a);
        }
    }
    let Some(path) = path else {
        return Ok(rest);
    };
    let path = Path::new(&path);
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("ConfigError: cannot read {}", path.display()))?;
    let injected = parse_config(&text, path)?;
    // argv[0] is the program and argv[1] the subcommand.
    let split = rest.len().min(2);
    let mut out: Vec<String> = rest[..split].to_vec();
    out.extend(injected);
    out.extend_from_slice(&rest[split..]);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn keys_become_flags() {
        let got = parse_config("# comment\nalpha = 3/2\n\npow2 = true\nsvg=false\nM=256\n", Path::new("c")).unwrap();
        assert_eq!(got, args(&["--alpha", "3/2", "--pow2", "--M", "256"]));
    }

    #[test]
    fn malformed_lines_are_rejected() {
        assert!(parse_config("alpha\n", Path::new("c")).is_err());
        assert!(parse_config("pow2 = maybe\n", Path::new("c")).is_err());
        assert!(parse_config("config = x\n", Path::new("c")).is_err());
    }

    #[test]
    fn file_flags_precede_command_line_flags() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        std::fs::write(&path, "alpha = 2\nn = 4\n").unwrap();
        let argv = args(&["kvsched", "run", "--config", path.to_str().unwrap(), "--alpha", "3"]);
        assert_eq!(
            expand_args(argv).unwrap(),
            args(&["kvsched", "run", "--alpha", "2", "--n", "4", "--alpha", "3"])
        );
    }

    #[test]
    fn no_config_is_a_no_op() {
        let argv = args(&["kvsched", "verify", "formulas"]);
        assert_eq!(expand_args(argv.clone()).unwrap(), argv);
    }
}
