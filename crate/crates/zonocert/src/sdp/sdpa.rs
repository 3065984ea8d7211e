//! SDPA sparse format (".dat-s") export and import.
//!
//! Layout: constraint count, block count, block sizes (negative sizes mark
//! diagonal blocks), the right-hand-side vector, then one entry per line as
//! `matno blockno i j value` with 1-based indices, `i <= j`, and `matno 0`
//! for the objective. Values are written with 17 significant digits so a
//! parse of the written file reproduces the problem bit for bit. Comment
//! lines starting with `"` or `*` are skipped on input.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{BlockKind, BlockSpec, MatEntry, SdpError, SdpProblem};

pub fn export_sdpa(p: &SdpProblem, path: impl AsRef<Path>) -> Result<(), SdpError> {
    let mut w = BufWriter::new(File::create(path)?);
    write_sdpa(p, &mut w)
}

pub fn write_sdpa(p: &SdpProblem, out: &mut impl Write) -> Result<(), SdpError> {
    writeln!(out, "{}", p.num_constraints())?;
    writeln!(out, "{}", p.blocks.len())?;
    let sizes: Vec<String> = p
        .blocks
        .iter()
        .map(|b| match b.kind {
            BlockKind::Psd => format!("{}", b.dim),
            BlockKind::Diag => format!("-{}", b.dim),
        })
        .collect();
    writeln!(out, "{}", sizes.join(" "))?;
    let rhs: Vec<String> = p.rhs.iter().map(|v| format!("{v:.16e}")).collect();
    writeln!(out, "{}", rhs.join(" "))?;
    let mut emit = |matno: usize, entries: &[MatEntry]| -> Result<(), SdpError> {
        for e in entries {
            writeln!(
                out,
                "{} {} {} {} {:.16e}",
                matno,
                e.block + 1,
                e.row + 1,
                e.col + 1,
                e.value
            )?;
        }
        Ok(())
    };
    emit(0, &p.objective)?;
    for (i, cons) in p.constraints.iter().enumerate() {
        emit(i + 1, cons)?;
    }
    Ok(())
}

pub fn parse_sdpa(path: impl AsRef<Path>) -> Result<SdpProblem, SdpError> {
    read_sdpa(&mut BufReader::new(File::open(path)?))
}

pub fn read_sdpa(input: &mut impl Read) -> Result<SdpProblem, SdpError> {
    let reader = BufReader::new(input);
    let mut lines = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('"') || trimmed.starts_with('*') {
            continue;
        }
        lines.push((idx + 1, trimmed.to_string()));
    }
    let mut it = lines.into_iter();
    let mut next = |what: &str| {
        it.next().ok_or_else(|| SdpError::Parse {
            line: 0,
            message: format!("unexpected end of file, expected {what}"),
        })
    };

    let (ln, m_line) = next("constraint count")?;
    let m: usize = parse_tok(&m_line, ln, "constraint count")?;
    let (ln, nb_line) = next("block count")?;
    let nblocks: usize = parse_tok(&nb_line, ln, "block count")?;
    let (ln, sizes_line) = next("block sizes")?;
    let sizes = split_numeric(&sizes_line);
    if sizes.len() != nblocks {
        return Err(SdpError::Parse {
            line: ln,
            message: format!("expected {nblocks} block sizes, found {}", sizes.len()),
        });
    }
    let mut blocks = Vec::with_capacity(nblocks);
    for tok in &sizes {
        let v: i64 = tok.parse().map_err(|_| SdpError::Parse {
            line: ln,
            message: format!("bad block size `{tok}`"),
        })?;
        if v == 0 {
            return Err(SdpError::Parse { line: ln, message: "zero block size".into() });
        }
        blocks.push(if v > 0 {
            BlockSpec { dim: v as usize, kind: BlockKind::Psd }
        } else {
            BlockSpec { dim: (-v) as usize, kind: BlockKind::Diag }
        });
    }
    let (ln, rhs_line) = next("right-hand side")?;
    let rhs_toks = split_numeric(&rhs_line);
    if rhs_toks.len() != m {
        return Err(SdpError::Parse {
            line: ln,
            message: format!("expected {m} right-hand-side values, found {}", rhs_toks.len()),
        });
    }
    let mut rhs = Vec::with_capacity(m);
    for tok in &rhs_toks {
        rhs.push(tok.parse::<f64>().map_err(|_| SdpError::Parse {
            line: ln,
            message: format!("bad rhs value `{tok}`"),
        })?);
    }

    let mut objective = Vec::new();
    let mut constraints: Vec<Vec<MatEntry>> = vec![Vec::new(); m];
    for (ln, line) in it {
        let toks = split_numeric(&line);
        if toks.len() != 5 {
            return Err(SdpError::Parse {
                line: ln,
                message: format!("expected `matno blockno i j value`, found {} fields", toks.len()),
            });
        }
        let matno: usize = parse_tok(&toks[0], ln, "matno")?;
        let blockno: usize = parse_tok(&toks[1], ln, "blockno")?;
        let i: usize = parse_tok(&toks[2], ln, "row")?;
        let j: usize = parse_tok(&toks[3], ln, "col")?;
        let value: f64 = toks[4].parse().map_err(|_| SdpError::Parse {
            line: ln,
            message: format!("bad value `{}`", toks[4]),
        })?;
        if matno > m {
            return Err(SdpError::Parse {
                line: ln,
                message: format!("matrix index {matno} exceeds constraint count {m}"),
            });
        }
        if blockno == 0 || blockno > nblocks || i == 0 || j == 0 {
            return Err(SdpError::Parse {
                line: ln,
                message: "block and matrix indices are 1-based".into(),
            });
        }
        let entry = MatEntry::new(blockno - 1, i - 1, j - 1, value);
        if matno == 0 {
            objective.push(entry);
        } else {
            constraints[matno - 1].push(entry);
        }
    }
    SdpProblem::new(blocks, objective, constraints, rhs)
}

fn parse_tok<T: std::str::FromStr>(tok: &str, line: usize, what: &str) -> Result<T, SdpError> {
    tok.parse().map_err(|_| SdpError::Parse {
        line,
        message: format!("bad {what} `{tok}`"),
    })
}

/// Tokenizes a data line, tolerating the `{},()` punctuation some SDPA
/// writers emit.
fn split_numeric(line: &str) -> Vec<String> {
    line.split(|c: char| c.is_whitespace() || matches!(c, '{' | '}' | '(' | ')' | ','))
        .filter(|t| !t.is_empty())
        .map(|t| t.to_string())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> SdpProblem {
        SdpProblem::new(
            vec![
                BlockSpec { dim: 2, kind: BlockKind::Psd },
                BlockSpec { dim: 3, kind: BlockKind::Diag },
            ],
            vec![MatEntry::new(0, 0, 0, 1.0), MatEntry::new(0, 1, 1, 1.0)],
            vec![
                vec![MatEntry::new(0, 0, 0, 1.0), MatEntry::new(1, 2, 2, -0.125)],
                vec![MatEntry::new(0, 0, 1, 0.1 + 0.2)],
            ],
            vec![1.0, -2.5e-9],
        )
        .unwrap()
    }

    #[test]
    fn round_trip_is_exact() {
        let p = toy();
        let mut buf = Vec::new();
        write_sdpa(&p, &mut buf).unwrap();
        let q = read_sdpa(&mut buf.as_slice()).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn known_layout_for_tiny_problem() {
        let p = SdpProblem::new(
            vec![BlockSpec { dim: 1, kind: BlockKind::Diag }],
            vec![MatEntry::new(0, 0, 0, 1.0)],
            vec![vec![MatEntry::new(0, 0, 0, 1.0)]],
            vec![1.0],
        )
        .unwrap();
        let mut buf = Vec::new();
        write_sdpa(&p, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "1");
        assert_eq!(lines[1], "1");
        assert_eq!(lines[2], "-1");
        assert_eq!(lines[3], "1.0000000000000000e0");
        assert_eq!(lines[4], "0 1 1 1 1.0000000000000000e0");
        assert_eq!(lines[5], "1 1 1 1 1.0000000000000000e0");
        assert_eq!(lines.len(), 6);
    }

    #[test]
    fn comments_are_skipped() {
        let text = "\"title comment\n*another\n1\n1\n-1\n2.0\n1 1 1 1 3.0\n";
        let q = read_sdpa(&mut text.as_bytes()).unwrap();
        assert_eq!(q.num_constraints(), 1);
        assert_eq!(q.rhs()[0], 2.0);
        assert_eq!(q.constraint(0)[0].value, 3.0);
    }
}
