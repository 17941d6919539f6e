//! Line-based file formats for found objects.
//!
//! All three formats share one shape: a `#`-prefixed header declaring the
//! parameters and the row count, followed by one object per line as
//! 1-based space-separated integers. Readers are strict about the header
//! and about per-row validity (length, range, orderedness) and annotate
//! every complaint with the file position; writers emit exactly what the
//! readers accept, so `read(write(x)) = x`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::design::DesignParams;
use crate::error::{Error, Result};
use crate::oa::OaParams;
use crate::perm;

/// A parsed orthogonal-array file: parameters plus symbol rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OaFile {
    pub params: OaParams,
    pub rows: Vec<Vec<u32>>,
}

/// A parsed design file: parameters, declared λ, and blocks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DesignFile {
    pub params: DesignParams,
    pub lambda: u64,
    pub blocks: Vec<Vec<u32>>,
}

/// A parsed permutation-family file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PermFile {
    pub n: u32,
    pub t: u32,
    pub perms: Vec<Vec<u32>>,
}

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

fn write_string(path: &Path, content: &str) -> Result<()> {
    fs::write(path, content).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Splits off the header line and enumerates the remaining nonempty,
/// non-comment lines as `(1-based line number, content)`.
fn split_lines(content: &str) -> (Option<&str>, Vec<(usize, &str)>) {
    let mut header = None;
    let mut rows = Vec::new();
    for (index, line) in content.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if header.is_none() {
            header = Some(trimmed);
            continue;
        }
        if trimmed.starts_with('#') {
            continue; // trailing comments are tolerated, never written
        }
        rows.push((index + 1, trimmed));
    }
    (header, rows)
}

/// Parses one `key=value` token, insisting on the exact key.
fn parse_field<T: std::str::FromStr>(
    token: Option<&str>,
    key: &str,
    path: &str,
) -> Result<T> {
    let token = token
        .ok_or_else(|| Error::parse(path, 1, format!("missing header field `{key}=`")))?;
    let value = token
        .strip_prefix(key)
        .and_then(|rest| rest.strip_prefix('='))
        .ok_or_else(|| {
            Error::parse(path, 1, format!("expected `{key}=<value>`, found `{token}`"))
        })?;
    value
        .parse()
        .map_err(|_| Error::parse(path, 1, format!("invalid value in `{token}`")))
}

fn expect_tag(tokens: &mut std::str::SplitWhitespace<'_>, family: &str, path: &str) -> Result<()> {
    match (tokens.next(), tokens.next()) {
        (Some("#"), Some(tag)) if tag == family => Ok(()),
        _ => Err(Error::parse(
            path,
            1,
            format!("header must start with `# {family}`"),
        )),
    }
}

fn expect_header_end(mut tokens: std::str::SplitWhitespace<'_>, path: &str) -> Result<()> {
    match tokens.next() {
        None => Ok(()),
        Some(extra) => Err(Error::parse(
            path,
            1,
            format!("unexpected header token `{extra}`"),
        )),
    }
}

fn parse_row(line: &str, line_no: usize, expected_len: usize, path: &str) -> Result<Vec<u32>> {
    let mut row = Vec::with_capacity(expected_len);
    for token in line.split_whitespace() {
        let value: u32 = token.parse().map_err(|_| {
            Error::parse(path, line_no, format!("`{token}` is not a positive integer"))
        })?;
        row.push(value);
    }
    if row.len() != expected_len {
        return Err(Error::parse(
            path,
            line_no,
            format!("expected {expected_len} entries, found {}", row.len()),
        ));
    }
    Ok(row)
}

fn check_count(declared: u64, actual: usize, what: &str, path: &str) -> Result<()> {
    if declared != actual as u64 {
        return Err(Error::parse(
            path,
            1,
            format!("header declares N={declared} but the file has {actual} {what}"),
        ));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// orthogonal arrays: `# oa q=<q> n=<n> t=<t> N=<rows>`
// ---------------------------------------------------------------------------

fn parse_oa(content: &str, path: &str) -> Result<OaFile> {
    let (header, lines) = split_lines(content);
    let header = header.ok_or_else(|| Error::parse(path, 1, "empty file"))?;
    let mut tokens = header.split_whitespace();
    expect_tag(&mut tokens, "oa", path)?;
    let q: u32 = parse_field(tokens.next(), "q", path)?;
    let n: u32 = parse_field(tokens.next(), "n", path)?;
    let t: u32 = parse_field(tokens.next(), "t", path)?;
    let declared: u64 = parse_field(tokens.next(), "N", path)?;
    expect_header_end(tokens, path)?;
    let params =
        OaParams::new(q, n, t).map_err(|e| Error::parse(path, 1, e.to_string()))?;

    let mut rows = Vec::with_capacity(lines.len());
    for (line_no, line) in lines {
        let row = parse_row(line, line_no, n as usize, path)?;
        if let Some(bad) = row.iter().find(|&&s| s == 0 || s > q) {
            return Err(Error::parse(
                path,
                line_no,
                format!("symbol {bad} outside 1..={q}"),
            ));
        }
        rows.push(row);
    }
    check_count(declared, rows.len(), "rows", path)?;
    Ok(OaFile { params, rows })
}

pub fn read_oa(path: &Path) -> Result<OaFile> {
    parse_oa(&read_to_string(path)?, &path.display().to_string())
}

pub fn write_oa(path: &Path, params: &OaParams, rows: &[Vec<u32>]) -> Result<()> {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# oa q={} n={} t={} N={}",
        params.q,
        params.n,
        params.t,
        rows.len()
    );
    for row in rows {
        let symbols: Vec<String> = row.iter().map(u32::to_string).collect();
        let _ = writeln!(out, "{}", symbols.join(" "));
    }
    write_string(path, &out)
}

// ---------------------------------------------------------------------------
// designs: `# design v=<v> k=<k> t=<t> N=<blocks> lambda=<λ>`
// ---------------------------------------------------------------------------

fn parse_design(content: &str, path: &str) -> Result<DesignFile> {
    let (header, lines) = split_lines(content);
    let header = header.ok_or_else(|| Error::parse(path, 1, "empty file"))?;
    let mut tokens = header.split_whitespace();
    expect_tag(&mut tokens, "design", path)?;
    let v: u32 = parse_field(tokens.next(), "v", path)?;
    let k: u32 = parse_field(tokens.next(), "k", path)?;
    let t: u32 = parse_field(tokens.next(), "t", path)?;
    let declared: u64 = parse_field(tokens.next(), "N", path)?;
    let lambda: u64 = parse_field(tokens.next(), "lambda", path)?;
    expect_header_end(tokens, path)?;
    let params =
        DesignParams::new(v, k, t).map_err(|e| Error::parse(path, 1, e.to_string()))?;

    // the counting identity λ·C(v,t) = N·C(k,t) must tie the header together
    match params.lambda_for(declared) {
        Some(expected) if expected == lambda => {}
        Some(expected) => {
            return Err(Error::parse(
                path,
                1,
                format!("lambda={lambda} is inconsistent with N={declared}: expected {expected}"),
            ));
        }
        None => {
            return Err(Error::parse(
                path,
                1,
                format!("no integer λ matches N={declared} blocks for these parameters"),
            ));
        }
    }

    let mut blocks = Vec::with_capacity(lines.len());
    for (line_no, line) in lines {
        let block = parse_row(line, line_no, k as usize, path)?;
        if let Some(bad) = block.iter().find(|&&x| x == 0 || x > v) {
            return Err(Error::parse(
                path,
                line_no,
                format!("point {bad} outside 1..={v}"),
            ));
        }
        if block.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::parse(
                path,
                line_no,
                "block points must be strictly increasing",
            ));
        }
        blocks.push(block);
    }
    check_count(declared, blocks.len(), "blocks", path)?;
    Ok(DesignFile {
        params,
        lambda,
        blocks,
    })
}

pub fn read_design(path: &Path) -> Result<DesignFile> {
    parse_design(&read_to_string(path)?, &path.display().to_string())
}

pub fn write_design(path: &Path, params: &DesignParams, blocks: &[Vec<u32>]) -> Result<()> {
    let lambda = params.lambda_for(blocks.len() as u64).ok_or_else(|| {
        Error::invalid(format!(
            "{} blocks admit no integer λ for these parameters",
            blocks.len()
        ))
    })?;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# design v={} k={} t={} N={} lambda={}",
        params.v,
        params.k,
        params.t,
        blocks.len(),
        lambda
    );
    for block in blocks {
        let points: Vec<String> = block.iter().map(u32::to_string).collect();
        let _ = writeln!(out, "{}", points.join(" "));
    }
    write_string(path, &out)
}

// ---------------------------------------------------------------------------
// permutations: `# perm n=<n> t=<t> N=<count>`
// ---------------------------------------------------------------------------

fn parse_perms(content: &str, path: &str) -> Result<PermFile> {
    let (header, lines) = split_lines(content);
    let header = header.ok_or_else(|| Error::parse(path, 1, "empty file"))?;
    let mut tokens = header.split_whitespace();
    expect_tag(&mut tokens, "perm", path)?;
    let n: u32 = parse_field(tokens.next(), "n", path)?;
    let t: u32 = parse_field(tokens.next(), "t", path)?;
    let declared: u64 = parse_field(tokens.next(), "N", path)?;
    expect_header_end(tokens, path)?;
    if n == 0 || t == 0 || t > n {
        return Err(Error::parse(
            path,
            1,
            format!("parameters n={n}, t={t} must satisfy 1 ≤ t ≤ n"),
        ));
    }

    let mut perms = Vec::with_capacity(lines.len());
    for (line_no, line) in lines {
        let perm = parse_row(line, line_no, n as usize, path)?;
        let mut seen = vec![false; n as usize];
        for &image in &perm {
            if image == 0 || image > n {
                return Err(Error::parse(
                    path,
                    line_no,
                    format!("image {image} outside 1..={n}"),
                ));
            }
            if std::mem::replace(&mut seen[image as usize - 1], true) {
                return Err(Error::parse(
                    path,
                    line_no,
                    format!("image {image} repeats; not a permutation"),
                ));
            }
        }
        perms.push(perm);
    }
    check_count(declared, perms.len(), "permutations", path)?;
    Ok(PermFile { n, t, perms })
}

pub fn read_perms(path: &Path) -> Result<PermFile> {
    parse_perms(&read_to_string(path)?, &path.display().to_string())
}

pub fn write_perms(path: &Path, n: u32, t: u32, perms: &[Vec<u32>]) -> Result<()> {
    let mut out = String::new();
    let _ = writeln!(out, "# perm n={n} t={t} N={}", perms.len());
    for perm in perms {
        let images: Vec<String> = perm.iter().map(u32::to_string).collect();
        let _ = writeln!(out, "{}", images.join(" "));
    }
    write_string(path, &out)
}

/// Convenience: a permutation file's rows as a [`perm::verify_t_wise`] call.
pub fn verify_perm_file(file: &PermFile) -> Result<perm::TwiseReport> {
    perm::verify_t_wise(file.n, file.t, &file.perms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tmp() -> tempfile::TempDir {
        tempfile::tempdir().expect("create temp dir")
    }

    #[test]
    fn oa_files_round_trip() {
        let dir = tmp();
        let path = dir.path().join("array.oa");
        let params = OaParams::new(2, 2, 1).unwrap();
        let rows = vec![vec![1, 1], vec![2, 2]];
        write_oa(&path, &params, &rows).unwrap();
        let file = read_oa(&path).unwrap();
        assert_eq!(file.params, params);
        assert_eq!(file.rows, rows);
    }

    #[test]
    fn oa_parser_rejects_malformed_input() {
        let cases: &[(&str, &str)] = &[
            ("", "empty file"),
            ("# oa q=2 n=2 t=1", "missing header field `N=`"),
            ("# oa q=2 n=2 t=1 N=1 extra=9", "unexpected header token"),
            ("# design v=4 k=3 t=1 N=0 lambda=0", "must start with `# oa`"),
            ("# oa q=2 n=2 t=1 N=1\n1 2 1", "expected 2 entries, found 3"),
            ("# oa q=2 n=2 t=1 N=1\n1 3", "symbol 3 outside 1..=2"),
            ("# oa q=2 n=2 t=1 N=2\n1 1", "header declares N=2"),
            ("# oa q=2 n=2 t=1 N=1\n1 x", "`x` is not a positive integer"),
            ("# oa q=1 n=2 t=1 N=0", "alphabet"),
        ];
        for (content, needle) in cases {
            match parse_oa(content, "test.oa") {
                Err(Error::Parse { msg, .. }) => {
                    assert!(msg.contains(needle), "`{msg}` should mention `{needle}`");
                }
                other => panic!("expected parse error for {content:?}, got {other:?}"),
            }
        }
    }

    #[test]
    fn oa_parse_errors_carry_line_positions() {
        let content = "# oa q=2 n=2 t=1 N=2\n1 1\n\n2 3\n";
        match parse_oa(content, "bad.oa") {
            Err(Error::Parse { path, line, .. }) => {
                assert_eq!(path, "bad.oa");
                assert_eq!(line, 4, "blank lines still count for positions");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn design_files_round_trip_and_pin_lambda() {
        let dir = tmp();
        let path = dir.path().join("fano.design");
        let params = DesignParams::new(7, 3, 2).unwrap();
        let blocks = vec![
            vec![1, 2, 3],
            vec![1, 4, 5],
            vec![1, 6, 7],
            vec![2, 4, 6],
            vec![2, 5, 7],
            vec![3, 4, 7],
            vec![3, 5, 6],
        ];
        write_design(&path, &params, &blocks).unwrap();
        let file = read_design(&path).unwrap();
        assert_eq!(file.lambda, 1, "7 triples on 7 points give λ = 1");
        assert_eq!(file.blocks, blocks);
    }

    #[test]
    fn design_parser_enforces_header_consistency() {
        // λ disagreeing with the block count is a format error
        let content = "# design v=7 k=3 t=2 N=7 lambda=2\n1 2 3\n";
        match parse_design(content, "test.design") {
            Err(Error::Parse { msg, line, .. }) => {
                assert_eq!(line, 1);
                assert!(msg.contains("inconsistent"), "{msg}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
        // a block count admitting no integer λ is as well
        let content = "# design v=7 k=3 t=2 N=3 lambda=1\n1 2 3\n1 2 4\n1 2 5\n";
        assert!(matches!(
            parse_design(content, "test.design"),
            Err(Error::Parse { line: 1, .. })
        ));
        // unsorted blocks are rejected with their position
        let content = "# design v=7 k=3 t=2 N=7 lambda=1\n1 2 3\n5 4 1\n";
        match parse_design(content, "test.design") {
            Err(Error::Parse { line, msg, .. }) => {
                assert_eq!(line, 3);
                assert!(msg.contains("strictly increasing"), "{msg}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn writing_an_impossible_block_count_fails() {
        let dir = tmp();
        let path = dir.path().join("bad.design");
        let params = DesignParams::new(7, 3, 2).unwrap();
        let blocks = vec![vec![1, 2, 3], vec![1, 2, 4], vec![1, 2, 5]];
        assert!(write_design(&path, &params, &blocks).is_err());
    }

    #[test]
    fn perm_files_round_trip() {
        let dir = tmp();
        let path = dir.path().join("family.perm");
        let perms = vec![vec![1, 2, 3], vec![2, 3, 1], vec![3, 1, 2]];
        write_perms(&path, 3, 1, &perms).unwrap();
        let file = read_perms(&path).unwrap();
        assert_eq!((file.n, file.t), (3, 1));
        assert_eq!(file.perms, perms);
        let report = verify_perm_file(&file).unwrap();
        assert!(report.pass, "the cyclic family is 1-wise uniform");
    }

    #[test]
    fn perm_parser_rejects_non_permutations() {
        let content = "# perm n=3 t=1 N=1\n1 2 2\n";
        match parse_perms(content, "test.perm") {
            Err(Error::Parse { msg, line, .. }) => {
                assert_eq!(line, 2);
                assert!(msg.contains("repeats"), "{msg}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(matches!(
            parse_perms("# perm n=3 t=4 N=0", "test.perm"),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn missing_files_surface_io_errors() {
        let dir = tmp();
        let path = dir.path().join("nope.oa");
        assert!(matches!(read_oa(&path), Err(Error::Io { .. })));
    }

    proptest! {
        #[test]
        fn oa_round_trip_holds_for_random_contents(
            q in 2u32..5,
            n in 1u32..5,
            rows_seed in proptest::collection::vec(0u64..1_000_000, 0..12),
        ) {
            let params = OaParams::new(q, n, 1).unwrap();
            let rows: Vec<Vec<u32>> = rows_seed
                .iter()
                .map(|&seed| {
                    (0..n)
                        .map(|i| {
                            let mix = seed.wrapping_mul(i as u64 + 1);
                            (mix % q as u64) as u32 + 1
                        })
                        .collect()
                })
                .collect();
            let dir = tmp();
            let path = dir.path().join("roundtrip.oa");
            write_oa(&path, &params, &rows).unwrap();
            let file = read_oa(&path).unwrap();
            prop_assert_eq!(file.params, params);
            prop_assert_eq!(file.rows, rows);
        }

        #[test]
        fn perm_round_trip_holds_for_random_families(
            n in 1u32..6,
            seeds in proptest::collection::vec(0u64..1_000_000, 1..10),
        ) {
            let perms: Vec<Vec<u32>> = seeds
                .iter()
                .map(|&seed| {
                    let mut images: Vec<u32> = (1..=n).collect();
                    // cheap seeded shuffle
                    let mut state = seed;
                    for i in (1..images.len()).rev() {
                        state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
                        let j = (state >> 33) as usize % (i + 1);
                        images.swap(i, j);
                    }
                    images
                })
                .collect();
            let dir = tmp();
            let path = dir.path().join("roundtrip.perm");
            write_perms(&path, n, 1, &perms).unwrap();
            let file = read_perms(&path).unwrap();
            prop_assert_eq!(file.n, n);
            prop_assert_eq!(file.perms, perms);
        }
    }
}
