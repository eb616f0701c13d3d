//! `key = value` text used for session and experiment configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Keys may repeat in
//! the input; callers see them in file order.

use crate::error::{Error, Result};

pub fn parse_kv(text: &str) -> Result<Vec<(String, String)>> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .map(|(i, l)| {
            let (k, v) = l
                .split_once('=')
                .ok_or_else(|| Error::Format(format!("line {}: expected `key = value`", i + 1)))?;
            let k = k.trim();
            if k.is_empty() {
                return Err(Error::Format(format!("line {}: empty key", i + 1)));
            }
            Ok((k.to_owned(), v.trim().to_owned()))
        })
        .collect()
}

pub(crate) fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Format(format!("bad value `{value}` for `{key}`")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_reports_bad_lines() {
        let kv = parse_kv("# c\n a = 1 \n\nb=x = y\n").unwrap();
        assert_eq!(kv, vec![("a".into(), "1".into()), ("b".into(), "x = y".into())]);
        assert!(parse_kv("novalue").is_err());
        assert!(parse_kv(" = 3").is_err());
        assert!(parse_value::<f64>("a", "zz").is_err());
    }
}
