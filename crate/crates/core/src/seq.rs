//! Finite truncations of integer sequences.

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A strictly increasing set of naturals, known exactly on `[0, horizon]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sequence {
    elements: Vec<u64>,
    horizon: u64,
}

impl Sequence {
    /// Build a sequence, checking order and that every element is within the horizon.
    pub fn new(elements: Vec<u64>, horizon: u64) -> Result<Self> {
        for (i, w) in elements.windows(2).enumerate() {
            if w[0] >= w[1] {
                return Err(Error::NotIncreasing {
                    position: i + 1,
                    prev: w[0],
                    next: w[1],
                });
            }
        }
        if let Some(&last) = elements.last() {
            if last > horizon {
                return Err(Error::BeyondHorizon { x: last, horizon });
            }
        }
        Ok(Sequence { elements, horizon })
    }

    /// Sequence from arbitrary (unsorted, possibly repeated) values.
    pub fn from_unsorted(mut values: Vec<u64>, horizon: u64) -> Result<Self> {
        values.sort_unstable();
        values.dedup();
        Sequence::new(values, horizon)
    }

    pub fn elements(&self) -> &[u64] {
        &self.elements
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    fn check(&self, x: u64) -> Result<()> {
        if x > self.horizon {
            Err(Error::BeyondHorizon {
                x,
                horizon: self.horizon,
            })
        } else {
            Ok(())
        }
    }

    /// Counting function A(x) = |{a <= x}|.
    pub fn count(&self, x: u64) -> Result<u64> {
        self.check(x)?;
        Ok(self.elements.partition_point(|&a| a <= x) as u64)
    }

    /// The n-th element, counting from zero.
    pub fn element(&self, n: usize) -> Result<u64> {
        self.elements.get(n).copied().ok_or(Error::IndexOutOfRange {
            index: n,
            len: self.elements.len(),
        })
    }

    pub fn contains(&self, x: u64) -> Result<bool> {
        self.check(x)?;
        Ok(self.elements.binary_search(&x).is_ok())
    }

    /// Elements not exceeding `x`.
    pub fn elements_upto(&self, x: u64) -> &[u64] {
        let k = self.elements.partition_point(|&a| a <= x);
        &self.elements[..k]
    }

    /// 0/1 indicator on `0..=n_max`.
    pub fn indicator(&self, n_max: u64) -> Result<Vec<u64>> {
        self.check(n_max)?;
        let mut v = vec![0u64; n_max as usize + 1];
        for &a in self.elements_upto(n_max) {
            v[a as usize] = 1;
        }
        Ok(v)
    }

    /// Values A(0), A(1), ..., A(n_max).
    pub fn counting_table(&self, n_max: u64) -> Result<Vec<u64>> {
        self.check(n_max)?;
        let mut v = vec![0u64; n_max as usize + 1];
        let mut it = self.elements.iter().peekable();
        let mut c = 0u64;
        for (x, slot) in v.iter_mut().enumerate() {
            while let Some(&&a) = it.peek() {
                if a as usize == x {
                    c += 1;
                    it.next();
                } else {
                    break;
                }
            }
            *slot = c;
        }
        Ok(v)
    }

    /// Restrict to `[0, horizon]`.
    pub fn truncate(&self, horizon: u64) -> Result<Sequence> {
        self.check(horizon)?;
        Ok(Sequence {
            elements: self.elements_upto(horizon).to_vec(),
            horizon,
        })
    }

    /// Elements at least `lower`.
    pub fn restrict_from(&self, lower: u64) -> Sequence {
        let k = self.elements.partition_point(|&a| a < lower);
        Sequence {
            elements: self.elements[k..].to_vec(),
            horizon: self.horizon,
        }
    }

    /// A copy with `k` inserted.
    pub fn with_element(&self, k: u64) -> Result<Sequence> {
        match self.elements.binary_search(&k) {
            Ok(_) => Err(Error::ElementPresent(k)),
            Err(pos) => {
                let mut e = self.elements.clone();
                e.insert(pos, k);
                Ok(Sequence {
                    elements: e,
                    horizon: self.horizon.max(k),
                })
            }
        }
    }

    /// Parse the text format: one natural per line, optional `# horizon=N` header.
    pub fn read_from<R: Read>(reader: R) -> Result<Sequence> {
        let mut declared = None;
        let mut elements = Vec::new();
        for (i, line) in BufReader::new(reader).lines().enumerate() {
            let line = line?;
            let t = line.trim();
            if t.is_empty() {
                continue;
            }
            if let Some(rest) = t.strip_prefix('#') {
                let rest = rest.trim();
                if let Some(v) = rest.strip_prefix("horizon=") {
                    let h = v.trim().parse::<u64>().map_err(|e| Error::MalformedFile {
                        line: i + 1,
                        reason: format!("bad horizon: {e}"),
                    })?;
                    declared = Some(h);
                }
                continue;
            }
            let v = t.parse::<u64>().map_err(|e| Error::MalformedFile {
                line: i + 1,
                reason: format!("{t:?}: {e}"),
            })?;
            if let Some(&prev) = elements.last() {
                if v <= prev {
                    return Err(Error::NotIncreasing {
                        position: elements.len(),
                        prev,
                        next: v,
                    });
                }
            }
            elements.push(v);
        }
        let last = elements.last().copied().unwrap_or(0);
        let horizon = declared.unwrap_or(last);
        if horizon < last {
            return Err(Error::MalformedFile {
                line: 1,
                reason: format!("declared horizon {horizon} below last element {last}"),
            });
        }
        Sequence::new(elements, horizon)
    }

    pub fn read_file(path: impl AsRef<Path>) -> Result<Sequence> {
        Sequence::read_from(std::fs::File::open(path)?)
    }

    /// Serialize in the text format, header included.
    pub fn to_text(&self) -> String {
        let mut s = format!("# horizon={}\n", self.horizon);
        for a in &self.elements {
            let _ = writeln!(s, "{a}");
        }
        s
    }

    pub fn write_file(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}
