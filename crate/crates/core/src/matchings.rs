//! Merger patterns: perfect matchings on the ordered levels `1..=2J`.
//!
//! A pattern records which pairs of levels confluence as the coupling grows.
//! Only non-crossing matchings are admissible: when level 1 merges with level
//! `2i`, the levels strictly between them and the levels beyond form two
//! groups that must be matched independently. Central symmetry is the level
//! reflection `n -> 2J + 1 - n`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// 1-based position of a level in the ascending spectrum `E_1 < ... < E_2J`.
pub type LevelIndex = usize;

/// Largest `J` enumerated unless the caller raises the cap. `C_14` is about
/// 2.7 million patterns.
pub const DEFAULT_ENUM_CAP: usize = 14;

const MAX_SIZE: usize = u16::MAX as usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PatternError {
    #[error("malformed symbol at byte {position}: {message}")]
    Parse { position: usize, message: String },
    #[error("invalid matching: {0}")]
    InvalidMatching(String),
    #[error("J = {j} exceeds the enumeration cap {cap}")]
    CapExceeded { j: usize, cap: usize },
}

/// A perfect matching of the levels `1..=2J`.
///
/// Stored as a partner table so that equal matchings compare equal regardless
/// of the order in which their pairs were supplied.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MergerPattern {
    // partner[i] is the 0-based partner of level i + 1
    partner: Vec<u16>,
}

impl MergerPattern {
    /// Builds a pattern from unordered pairs. The size is the largest index
    /// mentioned; every level up to it must appear exactly once.
    pub fn from_pairs<I>(pairs: I) -> Result<Self, PatternError>
    where
        I: IntoIterator<Item = (LevelIndex, LevelIndex)>,
    {
        let pairs: Vec<_> = pairs.into_iter().collect();
        if pairs.is_empty() {
            return Err(PatternError::InvalidMatching("no pairs".into()));
        }
        let size = pairs.iter().map(|&(a, b)| a.max(b)).max().unwrap_or(0);
        if size > MAX_SIZE {
            return Err(PatternError::InvalidMatching(format!(
                "level index {size} is too large"
            )));
        }
        const UNSET: u16 = u16::MAX;
        let mut partner = vec![UNSET; size];
        for &(a, b) in &pairs {
            if a == 0 || b == 0 {
                return Err(PatternError::InvalidMatching("level index 0".into()));
            }
            if a == b {
                return Err(PatternError::InvalidMatching(format!(
                    "level {a} paired with itself"
                )));
            }
            for (x, y) in [(a, b), (b, a)] {
                if partner[x - 1] != UNSET {
                    return Err(PatternError::InvalidMatching(format!(
                        "level {x} appears more than once"
                    )));
                }
                partner[x - 1] = (y - 1) as u16;
            }
        }
        if let Some(missing) = partner.iter().position(|&p| p == UNSET) {
            return Err(PatternError::InvalidMatching(format!(
                "level {} is not paired (size {size})",
                missing + 1
            )));
        }
        Ok(Self { partner })
    }

    fn from_partner_table(partner: Vec<u16>) -> Self {
        debug_assert!(partner
            .iter()
            .enumerate()
            .all(|(i, &p)| partner[p as usize] as usize == i && p as usize != i));
        Self { partner }
    }

    /// Number of levels, `2J`.
    pub fn size(&self) -> usize {
        self.partner.len()
    }

    /// Number of pairs, `J`.
    pub fn j(&self) -> usize {
        self.partner.len() / 2
    }

    /// Partner of a 1-based level.
    pub fn partner_of(&self, level: LevelIndex) -> Option<LevelIndex> {
        level
            .checked_sub(1)
            .and_then(|i| self.partner.get(i))
            .map(|&p| p as usize + 1)
    }

    /// Pairs in canonical order: `a < b` within a pair, ascending by `a`.
    pub fn pairs(&self) -> impl Iterator<Item = (LevelIndex, LevelIndex)> + '_ {
        self.partner
            .iter()
            .enumerate()
            .filter(|&(i, &p)| (p as usize) > i)
            .map(|(i, &p)| (i + 1, p as usize + 1))
    }

    /// No two pairs `{a,b}`, `{c,d}` with `a < c < b < d`.
    pub fn is_noncrossing(&self) -> bool {
        // Non-crossing iff every closing level matches the innermost open one.
        let mut open: Vec<usize> = Vec::with_capacity(self.j());
        for (i, &p) in self.partner.iter().enumerate() {
            let p = p as usize;
            if p > i {
                open.push(i);
            } else if open.pop() != Some(p) {
                return false;
            }
        }
        true
    }

    /// Image under the level reflection `n -> 2J + 1 - n`.
    pub fn reflect(&self) -> Self {
        let n = self.partner.len();
        let mut partner = vec![0u16; n];
        for (i, &p) in self.partner.iter().enumerate() {
            partner[n - 1 - i] = (n - 1 - p as usize) as u16;
        }
        Self { partner }
    }

    pub fn is_centrally_symmetric(&self) -> bool {
        let n = self.partner.len();
        self.partner
            .iter()
            .enumerate()
            .all(|(i, &p)| self.partner[n - 1 - i] as usize == n - 1 - p as usize)
    }

    /// Number of pairs strictly enclosing the pair that contains `level`.
    pub fn nesting_depth(&self, level: LevelIndex) -> usize {
        let (a, b) = match self.partner_of(level) {
            Some(p) => (level.min(p), level.max(p)),
            None => return 0,
        };
        self.pairs().filter(|&(c, d)| c < a && b < d).count()
    }

    /// Canonical text form, e.g. `{[1,6],[2,3],[4,5]}`.
    pub fn symbol(&self) -> String {
        let mut out = String::with_capacity(6 * self.j() + 2);
        out.push('{');
        for (k, (a, b)) in self.pairs().enumerate() {
            if k > 0 {
                out.push(',');
            }
            out.push_str(&format!("[{a},{b}]"));
        }
        out.push('}');
        out
    }
}

impl Ord for MergerPattern {
    fn cmp(&self, other: &Self) -> Ordering {
        self.pairs().cmp(other.pairs())
    }
}

impl PartialOrd for MergerPattern {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for MergerPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.symbol())
    }
}

impl fmt::Debug for MergerPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MergerPattern({})", self.symbol())
    }
}

impl FromStr for MergerPattern {
    type Err = PatternError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_symbol(s)
    }
}

pub fn format_symbol(p: &MergerPattern) -> String {
    p.symbol()
}

/// Parses `{[a,b],[c,d],...}`. ASCII spaces are allowed between tokens; pair
/// and element order need not be canonical.
pub fn parse_symbol(s: &str) -> Result<MergerPattern, PatternError> {
    let mut parser = SymbolParser {
        bytes: s.as_bytes(),
        pos: 0,
    };
    let pairs = parser.symbol()?;
    MergerPattern::from_pairs(pairs)
}

struct SymbolParser<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl SymbolParser<'_> {
    fn error<T>(&self, message: impl Into<String>) -> Result<T, PatternError> {
        Err(PatternError::Parse {
            position: self.pos,
            message: message.into(),
        })
    }

    fn skip_spaces(&mut self) {
        while self.bytes.get(self.pos) == Some(&b' ') {
            self.pos += 1;
        }
    }

    fn expect(&mut self, byte: u8) -> Result<(), PatternError> {
        self.skip_spaces();
        if self.bytes.get(self.pos) == Some(&byte) {
            self.pos += 1;
            Ok(())
        } else {
            self.error(format!("expected '{}'", byte as char))
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_spaces();
        self.bytes.get(self.pos).copied()
    }

    fn int(&mut self) -> Result<usize, PatternError> {
        self.skip_spaces();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return self.error("expected a level index");
        }
        // digits only, so utf8 is guaranteed
        let text = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap_or_default();
        match text.parse::<usize>() {
            Ok(0) => {
                self.pos = start;
                self.error("level indices start at 1")
            }
            Ok(v) if v <= MAX_SIZE => Ok(v),
            _ => {
                self.pos = start;
                self.error("level index out of range")
            }
        }
    }

    fn pair(&mut self) -> Result<(usize, usize), PatternError> {
        self.expect(b'[')?;
        let a = self.int()?;
        self.expect(b',')?;
        let b = self.int()?;
        self.expect(b']')?;
        Ok((a, b))
    }

    fn symbol(&mut self) -> Result<Vec<(usize, usize)>, PatternError> {
        self.expect(b'{')?;
        let mut pairs = vec![self.pair()?];
        loop {
            match self.peek() {
                Some(b',') => {
                    self.pos += 1;
                    pairs.push(self.pair()?);
                }
                Some(b'}') => {
                    self.pos += 1;
                    break;
                }
                _ => return self.error("expected ',' or '}'"),
            }
        }
        if self.peek().is_some() {
            return self.error("trailing characters");
        }
        Ok(pairs)
    }
}

fn check_cap(j: usize, cap: usize) -> Result<(), PatternError> {
    if j > cap || 2 * j > MAX_SIZE {
        return Err(PatternError::CapExceeded { j, cap });
    }
    if j == 0 {
        return Err(PatternError::InvalidMatching("J must be at least 1".into()));
    }
    Ok(())
}

/// All non-crossing matchings of `2J` levels, ascending by pair sequence.
pub fn enumerate_noncrossing(j: usize) -> Result<Vec<MergerPattern>, PatternError> {
    enumerate_noncrossing_capped(j, DEFAULT_ENUM_CAP)
}

pub fn enumerate_noncrossing_capped(
    j: usize,
    cap: usize,
) -> Result<Vec<MergerPattern>, PatternError> {
    check_cap(j, cap)?;
    let mut out: Vec<MergerPattern> = noncrossing_tables(j)
        .into_iter()
        .map(MergerPattern::from_partner_table)
        .collect();
    out.sort_unstable();
    Ok(out)
}

/// All reflection-fixed non-crossing matchings of `2J` levels, ascending by
/// pair sequence.
pub fn enumerate_symmetric(j: usize) -> Result<Vec<MergerPattern>, PatternError> {
    enumerate_symmetric_capped(j, DEFAULT_ENUM_CAP)
}

pub fn enumerate_symmetric_capped(
    j: usize,
    cap: usize,
) -> Result<Vec<MergerPattern>, PatternError> {
    check_cap(j, cap)?;
    let mut out: Vec<MergerPattern> = symmetric_tables(j)
        .into_iter()
        .map(MergerPattern::from_partner_table)
        .collect();
    out.sort_unstable();
    Ok(out)
}

/// Partner tables of every non-crossing matching on `2j` points (0-based).
/// Each matching is a balanced bracket word: a level either opens a new arch
/// or closes the innermost open one.
fn noncrossing_tables(j: usize) -> Vec<Vec<u16>> {
    fn walk(
        pos: usize,
        n: usize,
        open: &mut Vec<u16>,
        partner: &mut Vec<u16>,
        out: &mut Vec<Vec<u16>>,
    ) {
        if pos == n {
            out.push(partner.clone());
            return;
        }
        if open.len() < n - pos {
            open.push(pos as u16);
            walk(pos + 1, n, open, partner, out);
            open.pop();
        }
        if let Some(top) = open.pop() {
            partner[pos] = top;
            partner[top as usize] = pos as u16;
            walk(pos + 1, n, open, partner, out);
            open.push(top);
        }
    }
    let n = 2 * j;
    let mut out = Vec::new();
    walk(0, n, &mut Vec::with_capacity(j), &mut vec![0; n], &mut out);
    out
}

/// Direct construction of the symmetric non-crossing tables on `2j` points.
///
/// Either the outermost levels pair up around a symmetric pattern of `2j - 2`
/// levels, or level 1 closes an arch of width `2i + 2 <= j` (any non-crossing
/// filling inside), mirrored on the right, around a symmetric middle.
fn symmetric_tables(j: usize) -> Vec<Vec<u16>> {
    let mut memo: Vec<Vec<Vec<u16>>> = vec![vec![Vec::new()]];
    let mut fillings: Vec<Vec<Vec<u16>>> = Vec::new();
    for k in 1..=j {
        let n = 2 * k;
        let mut level = Vec::new();
        for inner in &memo[k - 1] {
            let mut t = Vec::with_capacity(n);
            t.push((n - 1) as u16);
            t.extend(inner.iter().map(|&p| p + 1));
            t.push(0);
            level.push(t);
        }
        let mut i = 0;
        while 2 * i + 2 <= k {
            if fillings.len() <= i {
                fillings.push(noncrossing_tables(i));
            }
            let block = 2 * i + 2;
            for fill in &fillings[i] {
                for middle in &memo[k - block] {
                    let mut t = vec![0u16; n];
                    t[0] = (block - 1) as u16;
                    t[block - 1] = 0;
                    for (q, &p) in fill.iter().enumerate() {
                        t[q + 1] = p + 1;
                    }
                    for (q, &p) in middle.iter().enumerate() {
                        t[q + block] = p + block as u16;
                    }
                    for q in 0..block {
                        t[n - 1 - q] = (n - 1) as u16 - t[q];
                    }
                    level.push(t);
                }
            }
            i += 1;
        }
        memo.push(level);
    }
    memo.swap_remove(j)
}
